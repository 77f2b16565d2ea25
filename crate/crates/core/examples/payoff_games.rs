//! Turns an antisymmetric payoff matrix (for example from an agent
//! tournament) into game logs, deterministically and by sampling, and
//! fits Bradley-Terry scores to the result.

use ratelab::evaluation::hindsight_bt;
use ratelab::synthetic::{payoff_to_games, PayoffMatrix, PayoffMode};

fn main() -> ratelab::Result<()> {
    let r = vec![
        vec![0.0, 0.4, -0.2, 0.8],
        vec![-0.4, 0.0, 0.6, 0.1],
        vec![0.2, -0.6, 0.0, 0.3],
        vec![-0.8, -0.1, -0.3, 0.0],
    ];
    let labels = ["rock", "paper", "scissors", "lizard"].map(String::from).to_vec();
    let m = PayoffMatrix::new(r, Some(labels.clone()))?;
    for (label, mode) in [
        ("expected", PayoffMode::Expected),
        ("bernoulli", PayoffMode::Bernoulli { copies: 50 }),
    ] {
        let d = payoff_to_games(&m, mode, 0, label)?;
        let fit = hindsight_bt(&d, 0.0)?;
        let scores: Vec<String> = labels
            .iter()
            .zip(&fit.theta)
            .map(|(l, s)| format!("{l} {s:+.2}"))
            .collect();
        println!("{label:<9} {} games: {}", d.len(), scores.join(", "));
    }
    Ok(())
}
