//! A five-player population where the Bradley-Terry fit ranks players
//! differently from their win rates, followed by a randomized check that
//! the two agree under transitive matrices and product matchmaking.

use ratelab::ranking::{population_mle, verify_winrate_theorem, MatchDistribution, Ranking};
use ratelab::synthetic::{gen_sst, gen_wst, MatrixKind, Variant, WinMatrix};

fn main() -> ratelab::Result<()> {
    let p = WinMatrix::from_rows(
        &[
            vec![0.5, 0.99, 0.99, 0.99, 0.99],
            vec![0.01, 0.5, 0.6, 0.7, 0.99],
            vec![0.01, 0.4, 0.5, 0.6, 0.99],
            vec![0.01, 0.3, 0.4, 0.5, 0.51],
            vec![0.01, 0.01, 0.01, 0.49, 0.5],
        ],
        MatrixKind::Custom,
    )?;
    let mut q = vec![vec![0.0; 5]; 5];
    for (i, j) in [(0, 1), (1, 3), (2, 4), (3, 4)] {
        q[i][j] = 0.125;
        q[j][i] = 0.125;
    }
    let mle = population_mle(&p, &MatchDistribution::new(q)?, 4)?;
    let order: Vec<String> = Ranking::from_scores(mle.theta.clone(), "mle")
        .order
        .iter()
        .map(|k| (k + 1).to_string())
        .collect();
    println!("population MLE θ = {:.2?}", mle.theta);
    println!(
        "ranking {} although player 2 beats player 3 with probability 0.6",
        order.join(" ≻ ")
    );

    let mut agree = 0;
    for seed in 0..40 {
        let n = 4 + (seed as usize % 10);
        let m = if seed % 2 == 0 {
            gen_sst(n, Variant::ByEntry, seed)?
        } else {
            gen_wst(n, Variant::ByRow, seed)?
        };
        let w: Vec<f64> = (0..n).map(|i| 1.0 + ((i as u64 * 7 + seed) % 5) as f64).collect();
        agree += usize::from(verify_winrate_theorem(&m, &w)?.agree);
    }
    println!("MLE and expected win-rate rankings agree in {agree}/40 random transitive instances");
    Ok(())
}
