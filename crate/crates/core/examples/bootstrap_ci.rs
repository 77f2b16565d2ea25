//! Bootstrap intervals for Bradley-Terry scores fitted to games sampled
//! from a fixed population, and how often they cover the population
//! optimum across independent samples.

use ratelab::ranking::{bootstrap_ci, population_mle, MatchDistribution};
use ratelab::synthetic::{gen_bt_matrix, sample_outcomes, schedule_fixed};

fn main() -> ratelab::Result<()> {
    let (n, t, b, samples) = (8, 10_000, 100, 20);
    let (p, _) = gen_bt_matrix(n, 9)?;
    // sparse matchmaking: each player meets the neighbours at distance 1 and 3
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| f64::from(u8::from(matches!(i.abs_diff(j), 1 | 3))))
                .collect()
        })
        .collect();
    let pin = n - 1;
    let target = population_mle(&p, &MatchDistribution::from_weights(q.clone())?, pin)?;

    let mut covered = vec![0; n];
    for seed in 0..samples {
        let d = sample_outcomes(&p, &schedule_fixed(&q, t, seed)?, seed, "fixed")?;
        let boot = bootstrap_ci(&d, b, (0.05, 0.95), pin, seed)?;
        if seed == 0 {
            println!("player  population θ   90% interval (first sample)");
            for (k, iv) in boot.intervals.iter().enumerate() {
                println!("{k:>6}  {:>12.3}   [{:.3}, {:.3}]", target.theta[k], iv.low, iv.high);
            }
        }
        for (k, iv) in boot.intervals.iter().enumerate() {
            covered[k] += usize::from(iv.low <= target.theta[k] && target.theta[k] <= iv.high);
        }
    }
    println!("\ncoverage over {samples} samples (player {pin} is pinned): {covered:?}");
    Ok(())
}
