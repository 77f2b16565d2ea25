use std::f64::consts::LN_2;

use super::EvalTrace;
use crate::error::{Error, Result};
use crate::raters::RaterSpec;

/// Extra weight on checkpoints that do worse than a coin flip.
pub const SELECTION_PENALTY: f64 = 5.0;

/// `Σ CE + 5·(CE − ln 2)·1[CE > ln 2]` over checkpoint average losses.
pub fn selection_loss(avg_losses: &[f64]) -> f64 {
    avg_losses
        .iter()
        .map(|&ce| {
            ce + if ce > LN_2 {
                SELECTION_PENALTY * (ce - LN_2)
            } else {
                0.0
            }
        })
        .sum()
}

/// Index of the grid cell with the lowest selection loss. Ties go to the
/// smaller initial step size, then to the lexicographically smaller
/// parameter label.
pub fn select_hyperparams(grid: &[(RaterSpec, EvalTrace)], n_players: usize) -> Result<usize> {
    if grid.is_empty() {
        return Err(Error::invalid("empty hyperparameter grid"));
    }
    let key = |k: usize| {
        let (spec, trace) = &grid[k];
        (
            selection_loss(&trace.avg_losses()),
            spec.initial_rate(n_players),
            spec.params_label(),
        )
    };
    let mut best = 0;
    let mut best_key = key(0);
    for k in 1..grid.len() {
        let cand = key(k);
        let better = cand.0 < best_key.0
            || (cand.0 == best_key.0 && (cand.1 < best_key.1 || (cand.1 == best_key.1 && cand.2 < best_key.2)));
        if better {
            best = k;
            best_key = cand;
        }
    }
    Ok(best)
}
