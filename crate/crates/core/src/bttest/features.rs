//! Per-game augmentation features for the likelihood-ratio tests. Every
//! builder returns a row-major matrix with two columns per game.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::fit_logistic;
use crate::data::{Dataset, SplitDataset};
use crate::error::Result;
use crate::logit::Observation;
use crate::math::{logit_cross_entropy, sigmoid};
use crate::raters::{Elo, LearningRate, Rater};
use crate::rng::{self, streams};

/// Ridge strength of the training-half fit behind [`features_score`].
pub const SCORE_TRAIN_LAMBDA: f64 = 10.0;

/// `[θ_train[i], θ_train[j]]` for every test game, together with the
/// training-half scores. Players without training games keep score 0.
pub fn features_score(d: &Dataset, split: &SplitDataset, lambda_train: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let obs: Vec<Observation> = split.train.iter().map(|&k| Observation::from(&d.games[k])).collect();
    let theta = fit_logistic(d.n_players, &obs, None, lambda_train)?.theta;
    let g = split
        .test
        .iter()
        .flat_map(|&k| [theta[d.games[k].i], theta[d.games[k].j]])
        .collect();
    Ok((g, theta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowRankOptions {
    /// Step on the mean training loss, multiplied by `N / 2`.
    pub step: f64,
    pub max_iter: usize,
    /// Fraction of the training half held out to decide when to stop.
    pub holdout: f64,
    /// Iterations without held-out improvement before stopping.
    pub patience: usize,
    /// Initial entries are uniform on `[0, init_scale]`.
    pub init_scale: f64,
}

impl Default for LowRankOptions {
    fn default() -> Self {
        LowRankOptions {
            step: 1.0,
            max_iter: 2000,
            holdout: 0.1,
            patience: 100,
            init_scale: 0.1,
        }
    }
}

/// Rank-one antisymmetric logit `u[i]v[j] − u[j]v[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFit {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iterations: usize,
    pub holdout_loss: f64,
}

fn lowrank_loss(u: &[f64], v: &[f64], d: &Dataset, idx: &[usize]) -> f64 {
    let s: f64 = idx
        .iter()
        .map(|&k| {
            let g = &d.games[k];
            logit_cross_entropy(g.o, u[g.i] * v[g.j] - u[g.j] * v[g.i])
        })
        .sum();
    s / idx.len().max(1) as f64
}

/// Gradient descent on the training half, stopped early on a held-out
/// slice of it; the best held-out iterate is returned.
pub fn fit_lowrank(d: &Dataset, split: &SplitDataset, opts: LowRankOptions, seed: u64) -> LowRankFit {
    let n = d.n_players;
    let mut rng = rng::stream(seed, streams::LOWRANK);
    let mut train = split.train.clone();
    train.shuffle(&mut rng);
    let n_hold = ((train.len() as f64) * opts.holdout).round() as usize;
    let (hold, fit_idx) = train.split_at(n_hold.min(train.len().saturating_sub(1)));
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=opts.init_scale)).collect();
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=opts.init_scale)).collect();
    let step = opts.step * n as f64 / 2.0;
    let scale = 1.0 / fit_idx.len().max(1) as f64;

    let mut best = (u.clone(), v.clone(), lowrank_loss(&u, &v, d, hold), 0usize);
    let mut since_best = 0;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let mut gu = vec![0.0; n];
        let mut gv = vec![0.0; n];
        for &k in fit_idx {
            let g = &d.games[k];
            let r = (sigmoid(u[g.i] * v[g.j] - u[g.j] * v[g.i]) - g.o) * scale;
            gu[g.i] += r * v[g.j];
            gv[g.j] += r * u[g.i];
            gu[g.j] -= r * v[g.i];
            gv[g.i] -= r * u[g.j];
        }
        for p in 0..n {
            u[p] -= step * gu[p];
            v[p] -= step * gv[p];
        }
        if hold.is_empty() {
            continue;
        }
        let l = lowrank_loss(&u, &v, d, hold);
        if l < best.2 {
            best = (u.clone(), v.clone(), l, it);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.patience {
                break;
            }
        }
    }
    if hold.is_empty() {
        let l = lowrank_loss(&u, &v, d, fit_idx);
        return LowRankFit {
            u,
            v,
            iterations,
            holdout_loss: l,
        };
    }
    LowRankFit {
        u: best.0,
        v: best.1,
        iterations: best.3,
        holdout_loss: best.2,
    }
}

/// `[u[i]v[j], u[j]v[i]]` for every test game.
pub fn features_lowrank(d: &Dataset, split: &SplitDataset, fit: &LowRankFit) -> Vec<f64> {
    let train_players = {
        let mut seen = vec![false; d.n_players];
        for &k in &split.train {
            seen[d.games[k].i] = true;
            seen[d.games[k].j] = true;
        }
        seen
    };
    let missing = split
        .test
        .iter()
        .filter(|&&k| !train_players[d.games[k].i] || !train_players[d.games[k].j])
        .count();
    if missing > 0 {
        log::warn!("{missing} test games involve players without training games; their features are 0");
    }
    split
        .test
        .iter()
        .flat_map(|&k| {
            let g = &d.games[k];
            if train_players[g.i] && train_players[g.j] {
                [fit.u[g.i] * fit.v[g.j], fit.u[g.j] * fit.v[g.i]]
            } else {
                [0.0, 0.0]
            }
        })
        .collect()
}

/// Online Elo scores `[θ_t[i], θ_t[j]]` before each game, for every game in
/// chronological order.
pub fn features_martingale(d: &Dataset, eta: f64) -> Result<Vec<f64>> {
    let mut elo = Elo::new(d.n_players, LearningRate::Constant { eta });
    let mut g = Vec::with_capacity(2 * d.len());
    for game in &d.games {
        g.push(elo.theta[game.i]);
        g.push(elo.theta[game.j]);
        elo.update(game.i, game.j, game.o, game.t)?;
    }
    Ok(g)
}

/// Rows of `g` (two columns) at the given game indices.
pub fn select_rows(g: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().flat_map(|&k| [g[2 * k], g[2 * k + 1]]).collect()
}
