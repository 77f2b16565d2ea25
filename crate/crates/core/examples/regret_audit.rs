//! Splits Elo's online loss into misspecification (best fixed model in
//! hindsight) and regret, for Bradley-Terry and rank-2 baselines, and
//! compares the per-step regret with the gradient-descent bound.

use ratelab::evaluation::{
    hindsight_bt, hindsight_elo2k, ogd_regret_bound, regret_decompose, replay, Elo2kOptions, ReplayOptions,
};
use ratelab::synthetic::{gen_sst, sample_outcomes, schedule_uniform, StrengthPath, Variant};
use ratelab::{LearningRate, RaterSpec};

fn main() -> ratelab::Result<()> {
    let (n, t, seed) = (40, 40_000, 2);
    let start = gen_sst(n, Variant::ByDiagonal, seed)?;
    let drifting = StrengthPath::new(start.clone(), start.reversed(), t)?;
    let spec = RaterSpec::Elo {
        rate: LearningRate::Decaying { a: 1.0, b: 0.0 },
    };

    for (label, d) in [
        (
            "stationary",
            sample_outcomes(&start, &schedule_uniform(n, t, seed)?, seed, "stationary")?,
        ),
        (
            "drifting",
            sample_outcomes(&drifting, &schedule_uniform(n, t, seed)?, seed, "drifting")?,
        ),
    ] {
        let trace = replay(&d, &spec, seed, ReplayOptions::default())?;
        let bt = hindsight_bt(&d, 0.0)?;
        let opts = Elo2kOptions {
            restarts: 2,
            max_iter: 5_000,
            ..Default::default()
        };
        let rank2 = hindsight_elo2k(&d, 2, seed, Some(&bt.theta), opts)?;
        println!("{label}:");
        for (class, loss) in [("bt", bt.loss), ("elo2k(2)", rank2.loss)] {
            let r = regret_decompose(&trace, loss, class);
            println!(
                "  vs {class:<9} online {:.4}  hindsight {:.4}  regret/step {:+.4}",
                r.total_loss_per_step, r.hindsight_loss_per_step, r.regret_per_step
            );
        }
        println!("  bound {:.4}", ogd_regret_bound(n, t));
    }
    Ok(())
}
