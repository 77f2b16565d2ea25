//! Per-game Glicko: rating plus rating deviation, updated after every game
//! rather than in rating periods.
//!
//! The expected score used inside the update, `p̃(a, b)`, scales the rating
//! gap by `g` of player `a`'s own deviation, and the variance term `d²(a, b)`
//! uses `g(v[b])²`. Glickman's original uses the opponent's deviation in both
//! places; the two coincide whenever the deviations are equal.

use std::f64::consts::{LN_10, PI};

use super::Rater;
use crate::error::Result;
use crate::math::sigmoid;

const Q: f64 = LN_10 / 400.0;

pub const INITIAL_RATING: f64 = 1500.0;

pub fn glicko_g(x: f64) -> f64 {
    1.0 / (1.0 + 3.0 * Q * Q * x * x / (PI * PI)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Glicko {
    pub theta: Vec<f64>,
    pub deviation: Vec<f64>,
}

impl Glicko {
    pub fn new(n_players: usize, initial_deviation: f64) -> Self {
        assert!(initial_deviation > 0.0, "deviation must be positive");
        Glicko {
            theta: vec![INITIAL_RATING; n_players],
            deviation: vec![initial_deviation; n_players],
        }
    }

    fn expected(&self, a: usize, b: usize) -> f64 {
        sigmoid(Q * glicko_g(self.deviation[a]) * (self.theta[a] - self.theta[b]))
    }

    /// New (rating, deviation) of `a` after scoring `s` against `b`.
    fn step(&self, a: usize, b: usize, s: f64) -> (f64, f64) {
        let e = self.expected(a, b);
        let gb = glicko_g(self.deviation[b]);
        let inv_d2 = Q * Q * gb * gb * e * (1.0 - e);
        let va = self.deviation[a];
        let var = 1.0 / (1.0 / (va * va) + inv_d2);
        (self.theta[a] + Q * var * gb * (s - e), var.sqrt())
    }
}

impl Rater for Glicko {
    fn n_players(&self) -> usize {
        self.theta.len()
    }

    fn predict(&self, i: usize, j: usize) -> f64 {
        let (vi, vj) = (self.deviation[i], self.deviation[j]);
        sigmoid(Q * glicko_g((vi * vi + vj * vj).sqrt()) * (self.theta[i] - self.theta[j]))
    }

    fn update(&mut self, i: usize, j: usize, o: f64, _t: usize) -> Result<()> {
        let (ti, vi) = self.step(i, j, o);
        let (tj, vj) = self.step(j, i, 1.0 - o);
        self.theta[i] = ti;
        self.theta[j] = tj;
        // keep strictly positive even if the information term is tiny
        self.deviation[i] = vi.min(self.deviation[i]).max(f64::MIN_POSITIVE);
        self.deviation[j] = vj.min(self.deviation[j]).max(f64::MIN_POSITIVE);
        Ok(())
    }

    fn snapshot_columns(&self) -> Vec<String> {
        vec!["theta".into(), "deviation".into()]
    }

    fn snapshot_rows(&self) -> Vec<Vec<f64>> {
        self.theta
            .iter()
            .zip(&self.deviation)
            .map(|(&t, &v)| vec![t, v])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_at_zero() {
        assert_eq!(glicko_g(0.0), 1.0);
    }

    #[test]
    fn predict_examples() {
        let mut s = Glicko::new(2, 350.0);
        assert_eq!(s.predict(0, 1), 0.5);
        s.theta = vec![1600.0, 1500.0];
        s.deviation = vec![0.0, 0.0];
        let want = 1.0 / (1.0 + (-100.0 * LN_10 / 400.0).exp());
        assert!((s.predict(0, 1) - want).abs() < 1e-15);
        assert!((want - 0.6401).abs() < 1e-4);
    }

    #[test]
    fn straight_line_update_from_defaults() {
        let mut s = Glicko::new(2, 350.0);
        s.update(0, 1, 1.0, 1).unwrap();

        // transcription of the per-game rule for two fresh players
        let q = 10f64.ln() / 400.0;
        let g = 1.0 / (1.0 + 3.0 * q * q * 350.0 * 350.0 / (PI * PI)).sqrt();
        let p = 0.5;
        let d2 = 1.0 / (q * q * g * g * p * (1.0 - p));
        let var = 1.0 / (1.0 / (350.0 * 350.0) + 1.0 / d2);
        let theta_winner = 1500.0 + q * var * g * (1.0 - p);
        let theta_loser = 1500.0 + q * var * g * (0.0 - p);

        assert!((s.theta[0] - theta_winner).abs() < 1e-9);
        assert!((s.theta[1] - theta_loser).abs() < 1e-9);
        assert!((s.deviation[0] - var.sqrt()).abs() < 1e-9);
        assert!((s.deviation[1] - var.sqrt()).abs() < 1e-9);
        // sanity against the familiar magnitude of a first Glicko update
        assert!((s.theta[0] - 1662.3).abs() < 0.5, "{}", s.theta[0]);
        assert!((s.deviation[0] - 290.3).abs() < 0.5, "{}", s.deviation[0]);
    }

    #[test]
    fn symmetric_draw_leaves_ratings() {
        let mut s = Glicko::new(2, 100.0);
        s.update(0, 1, 0.5, 1).unwrap();
        assert_eq!(s.theta, vec![1500.0, 1500.0]);
        assert!(s.deviation[0] < 100.0);
    }
}
