//! Shows the selection loss of each learning-rate schedule in the default
//! Elo grid and which one wins.

use ratelab::evaluation::{replay, select_hyperparams, selection_loss, ReplayOptions};
use ratelab::synthetic::{gen_wst, sample_outcomes, schedule_uniform, Variant};
use ratelab::{Algorithm, RaterSpec};

fn main() -> ratelab::Result<()> {
    let (n, t, seed) = (100, 30_000, 8);
    let truth = gen_wst(n, Variant::ByDiagonal, seed)?;
    let d = sample_outcomes(&truth, &schedule_uniform(n, t, seed)?, seed, "wst")?;
    let grid: Vec<_> = RaterSpec::default_grid(Algorithm::Elo, n)
        .into_iter()
        .map(|spec| Ok((spec, replay(&d, &spec, seed, ReplayOptions::default())?)))
        .collect::<ratelab::Result<_>>()?;
    for (spec, trace) in &grid {
        let last = trace.final_checkpoint().expect("non-empty replay");
        println!(
            "{:<18} selection loss {:>8.4}  final avg loss {:.4}",
            spec.params_label(),
            selection_loss(&trace.avg_losses()),
            last.avg_loss
        );
    }
    let best = select_hyperparams(&grid, n)?;
    println!("selected {}", grid[best].0.params_label());
    Ok(())
}
