use rand::Rng as _;

use super::{LearningRate, Rater};
use crate::error::Result;
use crate::math::{logit_cross_entropy, sigmoid};
use crate::rng::{self, streams};

/// Rank-k generalization of Elo: each player carries two k-vectors and the
/// logit of `i` beating `j` is `U[i]·V[j] − U[j]·V[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Elo2k {
    pub k: usize,
    /// Row-major `N × k`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub rate: LearningRate,
    n_players: usize,
}

impl Elo2k {
    /// Entries drawn i.i.d. from Uniform([0, 0.1]).
    pub fn new(n_players: usize, k: usize, rate: LearningRate, seed: u64) -> Self {
        let mut rng = rng::stream(seed, streams::RATER_INIT);
        let mut draw = |len: usize| (0..len).map(|_| 0.1 * rng.random::<f64>()).collect::<Vec<_>>();
        let u = draw(n_players * k);
        let v = draw(n_players * k);
        Elo2k {
            k,
            u,
            v,
            rate,
            n_players,
        }
    }

    pub fn from_factors(k: usize, u: Vec<f64>, v: Vec<f64>, rate: LearningRate) -> Self {
        assert_eq!(u.len(), v.len());
        assert_eq!(u.len() % k, 0);
        let n_players = u.len() / k;
        Elo2k {
            k,
            u,
            v,
            rate,
            n_players,
        }
    }

    pub fn u_row(&self, p: usize) -> &[f64] {
        &self.u[p * self.k..(p + 1) * self.k]
    }

    pub fn v_row(&self, p: usize) -> &[f64] {
        &self.v[p * self.k..(p + 1) * self.k]
    }

    pub fn logit(&self, i: usize, j: usize) -> f64 {
        dot(self.u_row(i), self.v_row(j)) - dot(self.u_row(j), self.v_row(i))
    }

    pub fn loss(&self, i: usize, j: usize, o: f64) -> f64 {
        logit_cross_entropy(o, self.logit(i, j))
    }

    /// Gradient of the game loss w.r.t. `(U[i], U[j], V[i], V[j])`.
    pub fn loss_gradient(&self, i: usize, j: usize, o: f64) -> [Vec<f64>; 4] {
        let r = o - self.predict(i, j);
        let scale = |row: &[f64], s: f64| row.iter().map(|x| s * x).collect::<Vec<_>>();
        [
            scale(self.v_row(j), -r),
            scale(self.v_row(i), r),
            scale(self.u_row(j), r),
            scale(self.u_row(i), -r),
        ]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Rater for Elo2k {
    fn n_players(&self) -> usize {
        self.n_players
    }

    fn predict(&self, i: usize, j: usize) -> f64 {
        sigmoid(self.logit(i, j))
    }

    fn update(&mut self, i: usize, j: usize, o: f64, t: usize) -> Result<()> {
        let step = self.rate.at(t, self.n_players) * (o - self.predict(i, j));
        let k = self.k;
        // all four rows move from the pre-update values
        let (ui, uj) = (self.u_row(i).to_vec(), self.u_row(j).to_vec());
        let (vi, vj) = (self.v_row(i).to_vec(), self.v_row(j).to_vec());
        for d in 0..k {
            self.u[i * k + d] = ui[d] + step * vj[d];
            self.u[j * k + d] = uj[d] - step * vi[d];
            self.v[i * k + d] = vi[d] - step * uj[d];
            self.v[j * k + d] = vj[d] + step * ui[d];
        }
        Ok(())
    }

    fn snapshot_columns(&self) -> Vec<String> {
        (0..self.k)
            .map(|d| format!("u{d}"))
            .chain((0..self.k).map(|d| format!("v{d}")))
            .collect()
    }

    fn snapshot_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_players)
            .map(|p| self.u_row(p).iter().chain(self.v_row(p)).copied().collect())
            .collect()
    }
}
