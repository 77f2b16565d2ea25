use std::io::Read;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, GameRecord};
use crate::error::{Error, Result};
use crate::rng::{self, streams};

use super::read_matrix_csv;

const SKEW_TOL: f64 = 1e-9;

/// Square skew-symmetric matrix of payoffs `r[i][j] ∈ [−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    r: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl PayoffMatrix {
    pub fn new(r: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = r.len();
        for (i, row) in r.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "payoff matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(-1.0..=1.0).contains(&x) {
                    return Err(Error::invalid(format!("payoff r[{i}][{j}] = {x} outside [-1, 1]")));
                }
            }
        }
        for (i, row) in r.iter().enumerate() {
            for (j, &x) in row.iter().enumerate().skip(i) {
                if (x + r[j][i]).abs() > SKEW_TOL {
                    return Err(Error::invalid(format!(
                        "payoff matrix not skew-symmetric at ({i}, {j}): {x} vs {}",
                        r[j][i]
                    )));
                }
            }
        }
        let labels = match labels {
            Some(l) if l.len() == n => l,
            Some(l) => {
                return Err(Error::invalid(format!("{} labels for {n} strategies", l.len())));
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(PayoffMatrix { r, labels })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Win probability `(r[i][j] + 1) / 2`.
    pub fn win_probability(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.r[i][j] + 1.0)
    }
}

/// Reads a payoff matrix CSV, with or without row/column headers.
pub fn read_payoff_csv<R: Read>(input: R) -> Result<PayoffMatrix> {
    let (rows, labels) = read_matrix_csv(input)?;
    PayoffMatrix::new(rows, labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PayoffMode {
    /// One game per ordered pair with the win probability as outcome.
    Expected,
    /// `copies` Bernoulli games per ordered pair.
    Bernoulli { copies: usize },
}

/// Ordered pairs are visited row-major; Bernoulli copies are emitted as
/// `copies` full passes over the pairs.
pub fn payoff_to_games(m: &PayoffMatrix, mode: PayoffMode, seed: u64, name: &str) -> Result<Dataset> {
    let n = m.n();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let games: Vec<GameRecord> = match mode {
        PayoffMode::Expected => pairs
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| GameRecord {
                t: k + 1,
                i,
                j,
                o: m.win_probability(i, j),
            })
            .collect(),
        PayoffMode::Bernoulli { copies } => {
            let mut rng = rng::stream(seed, streams::PAYOFF);
            (0..copies)
                .flat_map(|_| pairs.iter())
                .enumerate()
                .map(|(k, &(i, j))| {
                    let o = if rng.random::<f64>() < m.win_probability(i, j) {
                        1.0
                    } else {
                        0.0
                    };
                    GameRecord { t: k + 1, i, j, o }
                })
                .collect()
        }
    };
    Ok(Dataset {
        name: name.to_string(),
        n_players: n,
        games,
        player_names: m.labels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn antisym(n: usize) -> PayoffMatrix {
        let r = (0..n)
            .map(|i| (0..n).map(|j| ((j as f64) - (i as f64)) / n as f64).collect())
            .collect();
        PayoffMatrix::new(r, None).unwrap()
    }

    #[test]
    fn zero_payoff_is_a_draw() {
        let m = PayoffMatrix::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], None).unwrap();
        let d = payoff_to_games(&m, PayoffMode::Expected, 0, "z").unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.games.iter().all(|g| g.o == 0.5));
    }

    #[test]
    fn expected_mode_game_count() {
        let d = payoff_to_games(&antisym(56), PayoffMode::Expected, 0, "p").unwrap();
        assert_eq!(d.len(), 3080);
        assert_eq!(d.n_players, 56);
    }

    #[test]
    fn bernoulli_copies_multiply() {
        let m = antisym(7);
        let d = payoff_to_games(&m, PayoffMode::Bernoulli { copies: 10 }, 3, "p").unwrap();
        assert_eq!(d.len(), 420);
        assert!(d.games.iter().all(|g| g.o == 0.0 || g.o == 1.0));
        assert!(d.games.windows(2).all(|w| w[0].t + 1 == w[1].t));
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(PayoffMatrix::new(vec![vec![0.0, 0.5]], None).is_err());
        assert!(PayoffMatrix::new(vec![vec![0.0, 1.5], vec![-1.5, 0.0]], None).is_err());
        assert!(PayoffMatrix::new(vec![vec![0.0, 0.5], vec![-0.4, 0.0]], None).is_err());
    }

    #[test]
    fn reads_headed_csv() {
        let text = ",a,b\na,0,0.5\nb,-0.5,0\n";
        let m = read_payoff_csv(text.as_bytes()).unwrap();
        assert_eq!(m.labels, vec!["a", "b"]);
        assert_eq!(m.win_probability(0, 1), 0.75);
    }
}
