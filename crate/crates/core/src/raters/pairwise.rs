use std::collections::HashMap;

use super::Rater;
use crate::error::Result;

const PRIOR_WINS: f64 = 5.0;
const PRIOR_GAMES: f64 = 10.0;

/// Empirical head-to-head win rate with a 5-in-10 pseudo-count prior.
///
/// Only pairs that have met are stored, keyed by `(low, high)` with the win
/// credit of the lower index, so the table stays proportional to the number
/// of distinct pairings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairwise {
    n_players: usize,
    table: HashMap<(usize, usize), (f64, u64)>,
}

impl Pairwise {
    pub fn new(n_players: usize) -> Self {
        Pairwise {
            n_players,
            table: HashMap::new(),
        }
    }

    /// Accumulated win credit of `i` against `j`.
    pub fn wins(&self, i: usize, j: usize) -> f64 {
        match self.table.get(&(i.min(j), i.max(j))) {
            Some(&(w, _)) if i < j => w,
            Some(&(w, c)) => c as f64 - w,
            None => 0.0,
        }
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.table.get(&(i.min(j), i.max(j))).map_or(0, |&(_, c)| c)
    }
}

impl Rater for Pairwise {
    fn n_players(&self) -> usize {
        self.n_players
    }

    fn predict(&self, i: usize, j: usize) -> f64 {
        (PRIOR_WINS + self.wins(i, j)) / (PRIOR_GAMES + self.count(i, j) as f64)
    }

    fn update(&mut self, i: usize, j: usize, o: f64, _t: usize) -> Result<()> {
        let credit = if i < j { o } else { 1.0 - o };
        let entry = self.table.entry((i.min(j), i.max(j))).or_insert((0.0, 0));
        entry.0 += credit;
        entry.1 += 1;
        Ok(())
    }

    fn snapshot_columns(&self) -> Vec<String> {
        (0..self.n_players).map(|j| format!("p{j}")).collect()
    }

    fn snapshot_rows(&self) -> Vec<Vec<f64>> {
        super::prediction_matrix(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_and_counts() {
        let mut s = Pairwise::new(3);
        assert_eq!(s.predict(0, 1), 0.5);
        s.update(0, 1, 1.0, 1).unwrap();
        assert_eq!((s.count(0, 1), s.count(1, 0)), (1, 1));
        assert_eq!((s.wins(0, 1), s.wins(1, 0)), (1.0, 0.0));
        assert!((s.predict(0, 1) - 6.0 / 11.0).abs() < 1e-15);
        for (k, o) in [1.0, 1.0, 0.0, 0.0].into_iter().enumerate() {
            s.update(0, 1, o, k + 2).unwrap();
        }
        assert!((s.predict(0, 1) - 8.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn draw_splits_credit() {
        let mut s = Pairwise::new(2);
        s.update(1, 0, 0.5, 1).unwrap();
        assert_eq!((s.wins(0, 1), s.wins(1, 0)), (0.5, 0.5));
    }

    #[test]
    fn reversed_orientation() {
        let mut s = Pairwise::new(2);
        s.update(1, 0, 1.0, 1).unwrap();
        assert_eq!(s.wins(1, 0), 1.0);
        assert!((s.predict(1, 0) + s.predict(0, 1) - 1.0).abs() < 1e-15);
    }
}
