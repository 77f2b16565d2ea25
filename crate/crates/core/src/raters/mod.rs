//! Online rating algorithms behind one interface: `predict(i, j)` gives the
//! probability that `i` beats `j`, then `update(i, j, o, t)` consumes the
//! observed outcome of game `t` (1-based).

mod elo;
mod elo2k;
mod glicko;
mod pairwise;
mod trueskill;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use elo::Elo;
pub use elo2k::Elo2k;
pub use glicko::{glicko_g, Glicko};
pub use pairwise::Pairwise;
pub use trueskill::{trueskill_v, trueskill_w, TrueSkill};

use crate::error::Result;

pub trait Rater: Send {
    fn n_players(&self) -> usize;

    fn predict(&self, i: usize, j: usize) -> f64;

    fn update(&mut self, i: usize, j: usize, o: f64, t: usize) -> Result<()>;

    /// Column names for [`Rater::snapshot_rows`] (after the player column).
    fn snapshot_columns(&self) -> Vec<String>;

    /// One row of parameters per player.
    fn snapshot_rows(&self) -> Vec<Vec<f64>>;
}

/// Writes a rater snapshot as `player,param1,param2,...`.
pub fn write_snapshot<W: Write>(rater: &dyn Rater, names: &[String], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["player".to_string()];
    header.extend(rater.snapshot_columns());
    w.write_record(&header)?;
    for (p, row) in rater.snapshot_rows().into_iter().enumerate() {
        let mut rec = vec![names.get(p).cloned().unwrap_or_else(|| p.to_string())];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Learning rate `η_t` for gradient-style raters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearningRate {
    Constant {
        eta: f64,
    },
    /// `η_t = sqrt(a N / (t + b))`
    Decaying {
        a: f64,
        b: f64,
    },
}

impl LearningRate {
    pub fn at(&self, t: usize, n_players: usize) -> f64 {
        match *self {
            LearningRate::Constant { eta } => eta,
            LearningRate::Decaying { a, b } => (a * n_players as f64 / (t as f64 + b)).sqrt(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            LearningRate::Constant { eta } => format!("eta={eta}"),
            LearningRate::Decaying { a, b } => format!("a={a};b={b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Elo,
    Glicko,
    TrueSkill,
    Elo2k,
    Pairwise,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Elo,
        Algorithm::Glicko,
        Algorithm::TrueSkill,
        Algorithm::Elo2k,
        Algorithm::Pairwise,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Elo => "elo",
            Algorithm::Glicko => "glicko",
            Algorithm::TrueSkill => "trueskill",
            Algorithm::Elo2k => "elo2k",
            Algorithm::Pairwise => "pairwise",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| crate::error::Error::invalid(format!("unknown algorithm {s:?}")))
    }
}

/// An algorithm together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum RaterSpec {
    Elo { rate: LearningRate },
    Glicko { initial_deviation: f64 },
    TrueSkill { beta: f64 },
    Elo2k { k: usize, rate: LearningRate },
    Pairwise,
}

impl RaterSpec {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            RaterSpec::Elo { .. } => Algorithm::Elo,
            RaterSpec::Glicko { .. } => Algorithm::Glicko,
            RaterSpec::TrueSkill { .. } => Algorithm::TrueSkill,
            RaterSpec::Elo2k { .. } => Algorithm::Elo2k,
            RaterSpec::Pairwise => Algorithm::Pairwise,
        }
    }

    /// Fresh state for `n_players`; `seed` only matters for Elo2k.
    pub fn build(&self, n_players: usize, seed: u64) -> Box<dyn Rater> {
        match *self {
            RaterSpec::Elo { rate } => Box::new(Elo::new(n_players, rate)),
            RaterSpec::Glicko { initial_deviation } => Box::new(Glicko::new(n_players, initial_deviation)),
            RaterSpec::TrueSkill { beta } => Box::new(TrueSkill::new(n_players, beta)),
            RaterSpec::Elo2k { k, rate } => Box::new(Elo2k::new(n_players, k, rate, seed)),
            RaterSpec::Pairwise => Box::new(Pairwise::new(n_players)),
        }
    }

    /// Hyperparameters as `key=value` pairs joined by `;`.
    pub fn params_label(&self) -> String {
        match self {
            RaterSpec::Elo { rate } => rate.label(),
            RaterSpec::Glicko { initial_deviation } => format!("v0={initial_deviation}"),
            RaterSpec::TrueSkill { beta } => format!("beta={beta}"),
            RaterSpec::Elo2k { k, rate } => format!("k={k};{}", rate.label()),
            RaterSpec::Pairwise => String::new(),
        }
    }

    /// Step size at the first game, used to break selection ties.
    pub fn initial_rate(&self, n_players: usize) -> f64 {
        match self {
            RaterSpec::Elo { rate } | RaterSpec::Elo2k { rate, .. } => rate.at(1, n_players),
            _ => 0.0,
        }
    }

    /// Default sweep for one algorithm on `n_players` players.
    pub fn default_grid(algorithm: Algorithm, n_players: usize) -> Vec<RaterSpec> {
        let rates = default_rates(n_players);
        match algorithm {
            Algorithm::Elo => rates.into_iter().map(|rate| RaterSpec::Elo { rate }).collect(),
            Algorithm::Glicko => [35.0, 100.0, 350.0]
                .into_iter()
                .map(|initial_deviation| RaterSpec::Glicko { initial_deviation })
                .collect(),
            Algorithm::TrueSkill => [0.2, 0.8, 1.0]
                .into_iter()
                .map(|beta| RaterSpec::TrueSkill { beta })
                .collect(),
            Algorithm::Elo2k => [2, 4]
                .into_iter()
                .flat_map(|k| rates.iter().map(move |&rate| RaterSpec::Elo2k { k, rate }))
                .collect(),
            Algorithm::Pairwise => vec![RaterSpec::Pairwise],
        }
    }
}

/// Constant η ∈ {0.01, …, 0.16} and decaying (a, b) ∈ {0.25, 1, 4} × {0, N, 10N}.
pub fn default_rates(n_players: usize) -> Vec<LearningRate> {
    let n = n_players as f64;
    let mut rates: Vec<LearningRate> = [0.01, 0.02, 0.04, 0.08, 0.16]
        .into_iter()
        .map(|eta| LearningRate::Constant { eta })
        .collect();
    for a in [0.25, 1.0, 4.0] {
        for b in [0.0, n, 10.0 * n] {
            rates.push(LearningRate::Decaying { a, b });
        }
    }
    rates
}

/// Predictions for every ordered pair, diagonal fixed at 0.5.
pub fn prediction_matrix(rater: &dyn Rater) -> Vec<Vec<f64>> {
    let n = rater.n_players();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.5 } else { rater.predict(i, j) }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decaying_rate_example() {
        let r = LearningRate::Decaying { a: 1.0, b: 0.0 };
        assert!((r.at(4, 100) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn grids_have_expected_sizes() {
        assert_eq!(RaterSpec::default_grid(Algorithm::Elo, 100).len(), 14);
        assert_eq!(RaterSpec::default_grid(Algorithm::Elo2k, 100).len(), 28);
        assert_eq!(RaterSpec::default_grid(Algorithm::Glicko, 100).len(), 3);
        assert_eq!(RaterSpec::default_grid(Algorithm::TrueSkill, 100).len(), 3);
        assert_eq!(RaterSpec::default_grid(Algorithm::Pairwise, 100).len(), 1);
    }

    #[test]
    fn fresh_prediction_matrices_are_half() {
        for spec in [
            RaterSpec::Elo {
                rate: LearningRate::Constant { eta: 0.1 },
            },
            RaterSpec::Pairwise,
        ] {
            let r = spec.build(4, 0);
            assert!(prediction_matrix(r.as_ref()).iter().flatten().all(|&p| p == 0.5));
        }
    }

    #[test]
    fn snapshot_csv_layout() {
        let mut r = Elo::new(2, LearningRate::Constant { eta: 0.06 });
        r.update(0, 1, 1.0, 1).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&r, &["a".into(), "b".into()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("player,theta\na,0.03"));
    }
}
