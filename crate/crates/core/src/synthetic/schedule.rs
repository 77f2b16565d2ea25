use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::WinMatrix;
use crate::data::{Dataset, GameRecord};
use crate::error::{Error, Result};
use crate::raters::{Elo, LearningRate, Rater};
use crate::rng::{self, streams};

/// Step size of the live Elo that ranks players for window matchmaking.
pub const WINDOW_ELO_RATE: f64 = 0.06;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    Uniform,
    EloWindow { k: usize },
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSchedule {
    pub pairs: Vec<(usize, usize)>,
    pub scheme: Scheme,
}

/// Ground truth that may change over time.
pub trait WinProbability: Sync {
    fn n_players(&self) -> usize;

    /// Probability that `i` beats `j` at game `t` of `horizon` (1-based).
    fn prob(&self, t: usize, i: usize, j: usize) -> f64;
}

impl WinProbability for WinMatrix {
    fn n_players(&self) -> usize {
        self.n()
    }

    fn prob(&self, _t: usize, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// Linear drift `P^t = (1 − t/T)·P0 + (t/T)·PT`. Every interpolant is a
/// valid win matrix because the constraints are convex.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthPath {
    pub start: WinMatrix,
    pub end: WinMatrix,
    pub horizon: usize,
}

impl StrengthPath {
    pub fn new(start: WinMatrix, end: WinMatrix, horizon: usize) -> Result<Self> {
        if start.n() != end.n() {
            return Err(Error::invalid("start and end matrices differ in size"));
        }
        if horizon == 0 {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(StrengthPath { start, end, horizon })
    }

    pub fn at(&self, t: usize) -> WinMatrix {
        self.start.blend(&self.end, t as f64 / self.horizon as f64)
    }
}

impl WinProbability for StrengthPath {
    fn n_players(&self) -> usize {
        self.start.n()
    }

    fn prob(&self, t: usize, i: usize, j: usize) -> f64 {
        let w = t as f64 / self.horizon as f64;
        (1.0 - w) * self.start.get(i, j) + w * self.end.get(i, j)
    }
}

/// `i` uniform, then `j` uniform with `j = i` redrawn.
pub fn schedule_uniform(n: usize, t: usize, seed: u64) -> Result<MatchSchedule> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 players, got {n}")));
    }
    let mut rng = rng::stream(seed, streams::SCHEDULE);
    let pairs = (0..t)
        .map(|_| {
            let i = rng.random_range(0..n);
            loop {
                let j = rng.random_range(0..n);
                if j != i {
                    return (i, j);
                }
            }
        })
        .collect();
    Ok(MatchSchedule {
        pairs,
        scheme: Scheme::Uniform,
    })
}

/// I.i.d. ordered pairs from a matchmaking distribution `q[i][j]`
/// (normalized internally; the diagonal must be zero).
pub fn schedule_fixed(q: &[Vec<f64>], t: usize, seed: u64) -> Result<MatchSchedule> {
    let n = q.len();
    let mut cells = Vec::new();
    let mut weights = Vec::new();
    for (i, row) in q.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid("matchmaking matrix must be square"));
        }
        for (j, &w) in row.iter().enumerate() {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::invalid(format!("q[{i}][{j}] = {w} is not a weight")));
            }
            if w > 0.0 {
                if i == j {
                    return Err(Error::invalid(format!("q[{i}][{i}] must be zero")));
                }
                cells.push((i, j));
                weights.push(w);
            }
        }
    }
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::invalid(format!("matchmaking weights: {e}")))?;
    let mut rng = rng::stream(seed, streams::SCHEDULE);
    Ok(MatchSchedule {
        pairs: (0..t).map(|_| cells[dist.sample(&mut rng)]).collect(),
        scheme: Scheme::Fixed,
    })
}

/// Bernoulli outcomes for a schedule; game `t` uses the truth at time `t`.
pub fn sample_outcomes(truth: &dyn WinProbability, schedule: &MatchSchedule, seed: u64, name: &str) -> Result<Dataset> {
    let n = truth.n_players();
    let mut rng = rng::stream(seed, streams::OUTCOMES);
    let triples: Vec<(usize, usize, f64)> = schedule
        .pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let p = truth.prob(k + 1, i, j);
            (i, j, if rng.random::<f64>() < p { 1.0 } else { 0.0 })
        })
        .collect();
    Dataset::from_triples(name, n, triples)
}

/// Ranking by live score, best first, kept sorted by local moves.
struct LiveRanking {
    order: Vec<usize>,
    pos: Vec<usize>,
}

impl LiveRanking {
    fn new(n: usize) -> Self {
        LiveRanking {
            order: (0..n).collect(),
            pos: (0..n).collect(),
        }
    }

    /// `a` ranks ahead of `b`: higher score, ties to the smaller index.
    fn ahead(theta: &[f64], a: usize, b: usize) -> bool {
        theta[a] > theta[b] || (theta[a] == theta[b] && a < b)
    }

    fn reposition(&mut self, theta: &[f64], p: usize) {
        let mut k = self.pos[p];
        while k > 0 && Self::ahead(theta, p, self.order[k - 1]) {
            self.order[k] = self.order[k - 1];
            self.pos[self.order[k]] = k;
            k -= 1;
        }
        while k + 1 < self.order.len() && Self::ahead(theta, self.order[k + 1], p) {
            self.order[k] = self.order[k + 1];
            self.pos[self.order[k]] = k;
            k += 1;
        }
        self.order[k] = p;
        self.pos[p] = k;
    }
}

/// Skill-window matchmaking: `i` uniform, then `j` uniform among players
/// whose live-Elo rank is within `K/2` of `i`'s. Outcomes are drawn as the
/// schedule is built and fed back into the live Elo, so the result is a
/// single frozen dataset.
pub fn schedule_elo_window(
    truth: &dyn WinProbability,
    t: usize,
    k: usize,
    seed: u64,
    name: &str,
) -> Result<(MatchSchedule, Dataset)> {
    let n = truth.n_players();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 players, got {n}")));
    }
    if k < 2 {
        return Err(Error::invalid(format!("window K must be at least 2, got {k}")));
    }
    let half = k / 2;
    let mut pair_rng = rng::stream(seed, streams::SCHEDULE);
    let mut outcome_rng = rng::stream(seed, streams::OUTCOMES);
    let mut elo = Elo::new(n, LearningRate::Constant { eta: WINDOW_ELO_RATE });
    let mut ranking = LiveRanking::new(n);

    let mut pairs = Vec::with_capacity(t);
    let mut games = Vec::with_capacity(t);
    for step in 1..=t {
        let i = pair_rng.random_range(0..n);
        let pi = ranking.pos[i];
        let lo = pi.saturating_sub(half);
        let hi = (pi + half).min(n - 1);
        let width = hi - lo;
        if width == 0 {
            return Err(Error::Numerical(format!("empty matchmaking window at game {step}")));
        }
        let mut slot = lo + pair_rng.random_range(0..width);
        if slot >= pi {
            slot += 1;
        }
        let j = ranking.order[slot];
        let o = if outcome_rng.random::<f64>() < truth.prob(step, i, j) {
            1.0
        } else {
            0.0
        };
        elo.update(i, j, o, step)?;
        ranking.reposition(&elo.theta, i);
        ranking.reposition(&elo.theta, j);
        pairs.push((i, j));
        games.push(GameRecord { t: step, i, j, o });
    }
    let dataset = Dataset {
        name: name.to_string(),
        n_players: n,
        games,
        player_names: (0..n).map(|p| p.to_string()).collect(),
    };
    Ok((
        MatchSchedule {
            pairs,
            scheme: Scheme::EloWindow { k },
        },
        dataset,
    ))
}
