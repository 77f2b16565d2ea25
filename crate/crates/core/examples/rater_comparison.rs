//! Runs the default hyperparameter grid of every rater on one dataset and
//! reports the selected setting and its final average loss.

use rayon::prelude::*;

use ratelab::evaluation::{replay, select_hyperparams, ReplayOptions};
use ratelab::synthetic::{gen_sst, sample_outcomes, schedule_uniform, Variant};
use ratelab::{Algorithm, RaterSpec};

fn main() -> ratelab::Result<()> {
    let (n, t, seed) = (50, 20_000, 3);
    let truth = gen_sst(n, Variant::ByRow, seed)?;
    let d = sample_outcomes(&truth, &schedule_uniform(n, t, seed)?, seed, "sst")?;
    println!("{} games among {} players (sparsity {:.0})", d.len(), n, d.sparsity());

    for algo in Algorithm::ALL {
        let grid = RaterSpec::default_grid(algo, n)
            .into_par_iter()
            .map(|spec| Ok((spec, replay(&d, &spec, seed, ReplayOptions::default())?)))
            .collect::<ratelab::Result<Vec<_>>>()?;
        let best = select_hyperparams(&grid, n)?;
        let (spec, trace) = &grid[best];
        let last = trace.final_checkpoint().expect("non-empty replay");
        println!(
            "{:<10} {:<22} final avg loss {:.4}",
            algo.name(),
            spec.params_label(),
            last.avg_loss
        );
    }
    Ok(())
}
