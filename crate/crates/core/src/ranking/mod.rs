//! Rankings from game data and from win/matchmaking matrices.

use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::logit::{connected_components, NewtonOptions, Observation, PairLogit};
use crate::math::sigmoid;
use crate::rng::{self, streams};
use crate::synthetic::WinMatrix;

pub use crate::raters::prediction_matrix as pairwise_predictions_of;

/// Players ordered from strongest to weakest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub source: String,
}

impl Ranking {
    /// Descending by score, ties to the smaller index.
    pub fn from_scores(scores: Vec<f64>, source: impl Into<String>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Ranking {
            order,
            scores,
            source: source.into(),
        }
    }

    /// 0-based rank of every player.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (r, &p) in self.order.iter().enumerate() {
            pos[p] = r;
        }
        pos
    }
}

/// Distribution over ordered pairs of distinct players.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchDistribution {
    q: Vec<Vec<f64>>,
}

impl MatchDistribution {
    /// Validates a distribution that already sums to one.
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self> {
        let total = Self::check(&q)?;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("matchmaking weights sum to {total}, not 1")));
        }
        Ok(MatchDistribution { q })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(mut q: Vec<Vec<f64>>) -> Result<Self> {
        let total = Self::check(&q)?;
        if total <= 0.0 {
            return Err(Error::invalid("matchmaking weights are all zero"));
        }
        q.iter_mut().flatten().for_each(|x| *x /= total);
        Ok(MatchDistribution { q })
    }

    /// `q_ij ∝ w_i w_j` for `i ≠ j`.
    pub fn product(w: &[f64]) -> Result<Self> {
        let n = w.len();
        Self::from_weights(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { w[i] * w[j] }).collect())
                .collect(),
        )
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::product(&vec![1.0; n])
    }

    fn check(q: &[Vec<f64>]) -> Result<f64> {
        let n = q.len();
        let mut total = 0.0;
        for (i, row) in q.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("matchmaking matrix must be square"));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::invalid(format!("q[{i}][{j}] = {x} is not a probability")));
                }
                if i == j && x != 0.0 {
                    return Err(Error::invalid(format!("q[{i}][{i}] must be zero")));
                }
                total += x;
            }
        }
        Ok(total)
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.q
    }
}

/// Fraction of ordered pairs `i ≠ j` on which `p` and `p_hat` fall strictly
/// on opposite sides of 0.5. A prediction of exactly 0.5 never counts.
pub fn tau_consistency(p: &[Vec<f64>], p_hat: &[Vec<f64>]) -> f64 {
    let n = p.len();
    if n < 2 {
        return 0.0;
    }
    let mut disagree = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (p[i][j], p_hat[i][j]);
            if (a > 0.5 && b < 0.5) || (a < 0.5 && b > 0.5) {
                disagree += 1;
            }
        }
    }
    disagree as f64 / (n * (n - 1)) as f64
}

/// Average outcome of every player over its own games.
pub fn win_rates(d: &Dataset) -> Result<Vec<f64>> {
    let mut won = vec![0.0; d.n_players];
    let mut played = vec![0usize; d.n_players];
    for g in &d.games {
        won[g.i] += g.o;
        won[g.j] += 1.0 - g.o;
        played[g.i] += 1;
        played[g.j] += 1;
    }
    let idle: Vec<usize> = (0..d.n_players).filter(|&p| played[p] == 0).collect();
    if !idle.is_empty() {
        return Err(Error::PlayersWithoutGames(idle));
    }
    Ok(won.iter().zip(&played).map(|(w, &c)| w / c as f64).collect())
}

pub fn winrate_ranking(d: &Dataset) -> Result<Ranking> {
    Ok(Ranking::from_scores(win_rates(d)?, "winrate"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMle {
    pub theta: Vec<f64>,
    pub grad_norm: f64,
    /// `max_i |Σ_j q̄_ij (P_ij − σ(θ_i − θ_j))|` with `q̄` the symmetrized distribution.
    pub residual: f64,
}

/// BT scores minimizing the expected loss when pairs follow `q` and
/// outcomes follow `p`, with player `pin` held at zero.
pub fn population_mle(p: &WinMatrix, q: &MatchDistribution, pin: usize) -> Result<PopulationMle> {
    let n = p.n();
    if q.n() != n {
        return Err(Error::invalid(format!("P is {n}x{n} but Q is {0}x{0}", q.n())));
    }
    if pin >= n {
        return Err(Error::invalid(format!("pinned player {pin} out of range")));
    }
    let mut obs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && q.get(i, j) > 0.0 {
                obs.push(Observation {
                    i,
                    j,
                    o: p.get(i, j),
                    weight: q.get(i, j),
                });
            }
        }
    }
    let components = connected_components(n, obs.iter().map(|o| (o.i, o.j)));
    if components.len() > 1 {
        return Err(Error::Disconnected(components));
    }
    let fit = PairLogit::new(n, &obs).with_pinned(Some(pin)).fit(NewtonOptions {
        grad_tol: 1e-10,
        max_iter: 300,
    })?;
    let theta = fit.theta;
    let residual = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| 0.5 * (q.get(i, j) + q.get(j, i)) * (p.get(i, j) - sigmoid(theta[i] - theta[j])))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(Error::Numerical(format!(
            "stationarity residual {residual:e} after convergence"
        )));
    }
    Ok(PopulationMle {
        theta,
        grad_norm: fit.grad_norm,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinrateTheoremCheck {
    pub agree: bool,
    pub mle: Vec<f64>,
    /// `Σ_j w_j P_ij` with `P_ii = 0.5`, `w` normalized.
    pub expected_win_rate: Vec<f64>,
    /// First pair ordered differently by the two scores.
    pub counterexample: Option<(usize, usize)>,
}

/// Compares the population MLE ranking with the expected win-rate ranking
/// under product matchmaking `q_ij ∝ w_i w_j`. Differences within `1e-9`
/// count as ties, and ties must occur in both.
pub fn verify_winrate_theorem(p: &WinMatrix, w: &[f64]) -> Result<WinrateTheoremCheck> {
    let n = p.n();
    if w.len() != n {
        return Err(Error::invalid("weight vector length differs from the matrix size"));
    }
    let q = MatchDistribution::product(w)?;
    let pin = n - 1;
    let mle = population_mle(p, &q, pin)?.theta;
    let total: f64 = w.iter().sum();
    let rate: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| w[j] / total * p.get(i, j)).sum())
        .collect();
    let sign = |x: f64| {
        if x.abs() <= 1e-9 {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut counterexample = None;
    'outer: for a in 0..n {
        for b in a + 1..n {
            if sign(mle[a] - mle[b]) != sign(rate[a] - rate[b]) {
                counterexample = Some((a, b));
                break 'outer;
            }
        }
    }
    Ok(WinrateTheoremCheck {
        agree: counterexample.is_none(),
        mle,
        expected_win_rate: rate,
        counterexample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Empirical quantile interval: the lower end is order statistic
/// `⌊q_lo (B−1)⌋`, the upper `⌈q_hi (B−1)⌉` (0-based), so `B = 2` gives the
/// min and max.
pub fn quantile_interval(samples: &mut [f64], q_lo: f64, q_hi: f64) -> Interval {
    samples.sort_by(f64::total_cmp);
    let last = (samples.len() - 1) as f64;
    Interval {
        low: samples[(q_lo * last).floor() as usize],
        high: samples[(q_hi * last).ceil() as usize],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub intervals: Vec<Interval>,
    /// `B × N` fitted scores.
    pub replicates: Vec<Vec<f64>>,
}

/// Resamples the games `B` times with replacement, fits the BT MLE with
/// player `pin` at zero on each resample and reports per-player quantile
/// intervals. Players absent from a resample score 0 in that replicate.
pub fn bootstrap_ci(d: &Dataset, b: usize, quantiles: (f64, f64), pin: usize, seed: u64) -> Result<BootstrapResult> {
    if b < 2 {
        return Err(Error::invalid(format!("bootstrap needs B >= 2, got {b}")));
    }
    if d.is_empty() {
        return Err(Error::invalid("bootstrap needs at least one game"));
    }
    if pin >= d.n_players {
        return Err(Error::invalid(format!("pinned player {pin} out of range")));
    }
    let t = d.len();
    let replicates: Vec<Vec<f64>> = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, streams::BOOTSTRAP + streams::REPLICATE_BASE * r as u64);
            let obs: Vec<Observation> = (0..t)
                .map(|_| Observation::from(&d.games[rng.random_range(0..t)]))
                .collect();
            let mut seen = vec![false; d.n_players];
            for o in &obs {
                seen[o.i] = true;
                seen[o.j] = true;
            }
            let absent: Vec<usize> = (0..d.n_players).filter(|&p| !seen[p]).collect();
            if !absent.is_empty() {
                log::warn!("bootstrap replicate {r}: players {absent:?} absent, scored 0");
            }
            let fit = PairLogit::new(d.n_players, &obs)
                .with_pinned(Some(pin))
                .fit(NewtonOptions::default())?;
            let mut theta = fit.theta;
            for p in absent {
                theta[p] = 0.0;
            }
            Ok(theta)
        })
        .collect::<Result<_>>()?;
    let intervals = (0..d.n_players)
        .map(|p| {
            let mut col: Vec<f64> = replicates.iter().map(|th| th[p]).collect();
            quantile_interval(&mut col, quantiles.0, quantiles.1)
        })
        .collect();
    Ok(BootstrapResult { intervals, replicates })
}

/// Writes `rank,player,score,ci_low,ci_high` (1-based rank; empty interval
/// cells when no intervals are given).
pub fn write_ranking_csv<W: Write>(
    ranking: &Ranking,
    names: &[String],
    intervals: Option<&[Interval]>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "player", "score", "ci_low", "ci_high"])?;
    for (r, &p) in ranking.order.iter().enumerate() {
        let name = names.get(p).cloned().unwrap_or_else(|| p.to_string());
        let (lo, hi) = match intervals {
            Some(iv) => (iv[p].low.to_string(), iv[p].high.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([(r + 1).to_string(), name, ranking.scores[p].to_string(), lo, hi])?;
    }
    w.flush()?;
    Ok(())
}
