//! Skill-window matchmaking on drifting strengths. The matchmaker pairs
//! players by a live Elo ranking, so games depend on past outcomes; the
//! martingale test stays valid under that adaptivity, and the permutation
//! test looks for non-stationarity.

use ratelab::bttest::{bootstrap_permutation, format_table, lr_test, LrFeatures, LrTestOptions};
use ratelab::synthetic::{gen_sst, schedule_elo_window, StrengthPath, Variant};

fn main() -> ratelab::Result<()> {
    let (n, t, seed) = (40, 30_000, 6);
    let start = gen_sst(n, Variant::ByRow, seed)?;
    let path = StrengthPath::new(start.clone(), start.reversed(), t)?;
    let (schedule, d) = schedule_elo_window(&path, t, n / 5, seed, "window")?;
    let gap: f64 = schedule.pairs.iter().map(|&(i, j)| i.abs_diff(j) as f64).sum::<f64>() / t as f64;
    println!("{} games, mean index gap between opponents {gap:.1}", d.len());

    let mut reports = Vec::new();
    for eta in [0.01, 0.08] {
        let opts = LrTestOptions {
            features: LrFeatures::Martingale { eta },
            ..LrTestOptions::score()
        };
        reports.push(lr_test(&d, opts, seed)?);
    }
    let perm = bootstrap_permutation(&d, 0.01, 50, seed)?;
    reports.push(perm.report.clone());
    print!("{}", format_table(&reports));
    println!("original similarity {:.4}", perm.original_similarity);
    Ok(())
}
