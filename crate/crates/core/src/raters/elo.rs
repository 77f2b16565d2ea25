use super::{LearningRate, Rater};
use crate::error::Result;
use crate::math::{logit_cross_entropy, sigmoid};

/// Scalar rating per player; the update is one online gradient step on the
/// cross-entropy of the logistic prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Elo {
    pub theta: Vec<f64>,
    pub rate: LearningRate,
}

impl Elo {
    pub fn new(n_players: usize, rate: LearningRate) -> Self {
        Elo {
            theta: vec![0.0; n_players],
            rate,
        }
    }

    pub fn with_scores(theta: Vec<f64>, rate: LearningRate) -> Self {
        Elo { theta, rate }
    }

    /// Cross-entropy of one game as a function of the current scores.
    pub fn loss(&self, i: usize, j: usize, o: f64) -> f64 {
        logit_cross_entropy(o, self.theta[i] - self.theta[j])
    }

    /// The two non-zero entries of the loss gradient: `(∂/∂θ[i], ∂/∂θ[j])`.
    pub fn loss_gradient(&self, i: usize, j: usize, o: f64) -> (f64, f64) {
        let r = o - self.predict(i, j);
        (-r, r)
    }

    /// Scores on the conventional display scale.
    pub fn display_scores(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t * crate::math::ELO_DISPLAY_SCALE).collect()
    }
}

impl Rater for Elo {
    fn n_players(&self) -> usize {
        self.theta.len()
    }

    fn predict(&self, i: usize, j: usize) -> f64 {
        sigmoid(self.theta[i] - self.theta[j])
    }

    fn update(&mut self, i: usize, j: usize, o: f64, t: usize) -> Result<()> {
        let step = self.rate.at(t, self.theta.len()) * (o - self.predict(i, j));
        self.theta[i] += step;
        self.theta[j] -= step;
        Ok(())
    }

    fn snapshot_columns(&self) -> Vec<String> {
        vec!["theta".into()]
    }

    fn snapshot_rows(&self) -> Vec<Vec<f64>> {
        self.theta.iter().map(|&t| vec![t]).collect()
    }
}
