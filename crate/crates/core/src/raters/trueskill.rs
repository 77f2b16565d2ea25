//! Two-player TrueSkill with Gaussian win probability and moment-matched
//! updates of mean and uncertainty. Draws (o = 0.5) leave the means alone.

use super::Rater;
use crate::error::{Error, Result};
use crate::math::{normal_cdf, pdf_over_cdf};

/// `φ(x) / Φ(x)`
pub fn trueskill_v(x: f64) -> f64 {
    pdf_over_cdf(x)
}

/// `v(x) (v(x) + x)`
pub fn trueskill_w(x: f64) -> f64 {
    let v = trueskill_v(x);
    v * (v + x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueSkill {
    pub theta: Vec<f64>,
    pub uncertainty: Vec<f64>,
    pub beta: f64,
}

impl TrueSkill {
    /// Uncertainty starts at `2β` (variance `4β²`).
    pub fn new(n_players: usize, beta: f64) -> Self {
        assert!(beta > 0.0, "beta must be positive");
        TrueSkill {
            theta: vec![0.0; n_players],
            uncertainty: vec![2.0 * beta; n_players],
            beta,
        }
    }

    fn spread(&self, i: usize, j: usize) -> f64 {
        let (vi, vj) = (self.uncertainty[i], self.uncertainty[j]);
        (2.0 * self.beta * self.beta + vi * vi + vj * vj).sqrt()
    }
}

impl Rater for TrueSkill {
    fn n_players(&self) -> usize {
        self.theta.len()
    }

    fn predict(&self, i: usize, j: usize) -> f64 {
        normal_cdf((self.theta[i] - self.theta[j]) / self.spread(i, j))
    }

    fn update(&mut self, i: usize, j: usize, o: f64, _t: usize) -> Result<()> {
        if o != 0.0 && o != 0.5 && o != 1.0 {
            return Err(Error::invalid(format!(
                "TrueSkill needs a win, draw or loss, got outcome {o}"
            )));
        }
        let c = self.spread(i, j);
        let c2 = c * c;
        let sign = 2.0 * o - 1.0;
        let x = (self.theta[i] - self.theta[j]) * sign / c;
        let (v, w) = (trueskill_v(x), trueskill_w(x));
        let (vi2, vj2) = (self.uncertainty[i].powi(2), self.uncertainty[j].powi(2));

        self.theta[i] += sign * vi2 / c2 * v;
        self.theta[j] -= sign * vj2 / c2 * v;
        // w ∈ (0, 1) and v²/c² < 1, so both factors stay in (0, 1)
        self.uncertainty[i] *= (1.0 - vi2 / c2 * w).max(0.0).sqrt();
        self.uncertainty[j] *= (1.0 - vj2 / c2 * w).max(0.0).sqrt();
        Ok(())
    }

    fn snapshot_columns(&self) -> Vec<String> {
        vec!["theta".into(), "uncertainty".into()]
    }

    fn snapshot_rows(&self) -> Vec<Vec<f64>> {
        self.theta
            .iter()
            .zip(&self.uncertainty)
            .map(|(&t, &v)| vec![t, v])
            .collect()
    }
}
