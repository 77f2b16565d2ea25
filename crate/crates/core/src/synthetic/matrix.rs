use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::rng::{self, streams};

/// Recipe for the upper triangle of a transitive matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    ByRow,
    ByDiagonal,
    ByEntry,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "byrow" => Ok(Variant::ByRow),
            "bydiagonal" => Ok(Variant::ByDiagonal),
            "byentry" => Ok(Variant::ByEntry),
            other => Err(Error::invalid(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    Bt,
    Sst(Variant),
    Wst(Variant),
    Custom,
}

/// `P[i][j]` is the probability that `i` beats `j`; `P + Pᵀ = 1`, diagonal ½.
#[derive(Debug, Clone, PartialEq)]
pub struct WinMatrix {
    n: usize,
    p: Vec<f64>,
    pub kind: MatrixKind,
}

impl WinMatrix {
    /// Fills the upper triangle with `upper(i, j)` (`i < j`) and mirrors it.
    pub fn from_upper(n: usize, kind: MatrixKind, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut p = vec![0.5; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = upper(i, j);
                p[i * n + j] = v;
                p[j * n + i] = 1.0 - v;
            }
        }
        WinMatrix { n, p, kind }
    }

    /// Checked constructor from rows.
    pub fn from_rows(rows: &[Vec<f64>], kind: MatrixKind) -> Result<Self> {
        let n = rows.len();
        let mut p = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            p.extend_from_slice(row);
        }
        let m = WinMatrix { n, p, kind };
        m.validate(1e-9)?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.n.max(1)).map(|r| r.to_vec()).take(self.n).collect()
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        for i in 0..self.n {
            if (self.get(i, i) - 0.5).abs() > tol {
                return Err(Error::invalid(format!("P[{i}][{i}] must be 0.5")));
            }
            for j in 0..self.n {
                let v = self.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("P[{i}][{j}] = {v} outside [0, 1]")));
                }
                if (v + self.get(j, i) - 1.0).abs() > tol {
                    return Err(Error::invalid(format!("P[{i}][{j}] + P[{j}][{i}] != 1")));
                }
            }
        }
        Ok(())
    }

    /// Strong stochastic transitivity for `order` (strongest first): each
    /// player's row dominates the row of every weaker player. Checking
    /// adjacent players suffices because dominance is transitive.
    pub fn is_sst_for(&self, order: &[usize]) -> bool {
        order.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            (0..self.n).all(|k| self.get(a, k) >= self.get(b, k))
        })
    }

    /// SST for the index order (player 0 strongest).
    pub fn is_sst(&self) -> bool {
        self.is_sst_for(&(0..self.n).collect::<Vec<_>>())
    }

    /// Weak stochastic transitivity: every stronger player is at least even.
    pub fn is_wst_for(&self, order: &[usize]) -> bool {
        order
            .iter()
            .enumerate()
            .all(|(r, &a)| order[r + 1..].iter().all(|&b| self.get(a, b) >= 0.5))
    }

    pub fn is_wst(&self) -> bool {
        self.is_wst_for(&(0..self.n).collect::<Vec<_>>())
    }

    /// Pointwise `(1 − w)·self + w·other`.
    pub fn blend(&self, other: &WinMatrix, w: f64) -> WinMatrix {
        assert_eq!(self.n, other.n);
        WinMatrix {
            n: self.n,
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect(),
            kind: MatrixKind::Custom,
        }
    }

    /// `1 − P`, i.e. every matchup reversed.
    pub fn reversed(&self) -> WinMatrix {
        WinMatrix {
            n: self.n,
            p: self.p.iter().map(|v| 1.0 - v).collect(),
            kind: MatrixKind::Custom,
        }
    }

    /// Plain `N × N` CSV without headers.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in self.p.chunks(self.n.max(1)).take(self.n) {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Matrix rows with optional player labels.
pub type LabeledRows = (Vec<Vec<f64>>, Option<Vec<String>>);

/// Reads a square numeric matrix. A header row and a leading label column
/// are detected and skipped; labels are returned when present.
pub fn read_matrix_csv<R: Read>(input: R) -> Result<LabeledRows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records: Vec<csv::StringRecord> = Vec::new();
    for r in reader.records() {
        records.push(r?);
    }
    if records.is_empty() {
        return Ok((Vec::new(), None));
    }
    let has_header = records[0].iter().any(|c| c.parse::<f64>().is_err());
    let body = if has_header { &records[1..] } else { &records[..] };
    // a label column is either non-numeric or makes the rows one entry too long
    let has_labels = body
        .first()
        .map(|r| r.len() == body.len() + 1 || r.get(0).is_some_and(|c| c.parse::<f64>().is_err()))
        .unwrap_or(false);
    let skip = usize::from(has_labels);
    let mut rows = Vec::with_capacity(body.len());
    for (k, rec) in body.iter().enumerate() {
        let line = k + 1 + usize::from(has_header);
        let row: Result<Vec<f64>> = rec
            .iter()
            .skip(skip)
            .map(|c| {
                c.parse::<f64>().map_err(|_| Error::Validation {
                    line: line as u64,
                    message: format!("bad number {c:?}"),
                })
            })
            .collect();
        rows.push(row?);
    }
    let labels = if has_labels {
        Some(body.iter().map(|r| r[0].to_string()).collect())
    } else if has_header {
        Some(
            records[0]
                .iter()
                .skip(records[0].len() - rows.len())
                .map(String::from)
                .collect(),
        )
    } else {
        None
    };
    Ok((rows, labels))
}

/// BT matrix `P[i][j] = σ(θ[i] − θ[j])`.
pub fn bt_from_scores(theta: &[f64]) -> WinMatrix {
    WinMatrix::from_upper(theta.len(), MatrixKind::Bt, |i, j| sigmoid(theta[i] - theta[j]))
}

/// BT matrix with true scores drawn i.i.d. from Uniform([−2, 2]).
pub fn gen_bt_matrix(n: usize, seed: u64) -> Result<(WinMatrix, Vec<f64>)> {
    check_size(n)?;
    let mut rng = rng::stream(seed, streams::MATRIX);
    let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
    Ok((bt_from_scores(&theta), theta))
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 players, got {n}")));
    }
    Ok(())
}

fn sorted_uniforms(n: usize, seed: u64, descending: bool) -> Vec<f64> {
    let mut rng = rng::stream(seed, streams::MATRIX);
    let mut r: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
    r.sort_by(|a, b| a.total_cmp(b));
    if descending {
        r.reverse();
    }
    r
}

/// Strongly stochastically transitive matrix for the order 0 ≻ 1 ≻ … ≻ N−1.
pub fn gen_sst(n: usize, variant: Variant, seed: u64) -> Result<WinMatrix> {
    check_size(n)?;
    let kind = MatrixKind::Sst(variant);
    Ok(match variant {
        Variant::ByRow => {
            let r = sorted_uniforms(n, seed, true);
            WinMatrix::from_upper(n, kind, |i, _| 0.5 + 0.5 * r[i])
        }
        Variant::ByDiagonal => {
            let r = sorted_uniforms(n, seed, true);
            WinMatrix::from_upper(n, kind, |i, j| 0.5 + 0.5 * r[n - j + i - 1])
        }
        Variant::ByEntry => WinMatrix::from_upper(n, kind, |_, _| 0.6),
    })
}

/// Weakly (but generally not strongly) transitive matrix for the same order.
pub fn gen_wst(n: usize, variant: Variant, seed: u64) -> Result<WinMatrix> {
    check_size(n)?;
    let kind = MatrixKind::Wst(variant);
    Ok(match variant {
        Variant::ByRow => {
            let r = sorted_uniforms(n, seed, false);
            WinMatrix::from_upper(n, kind, |i, _| 0.5 + 0.5 * r[i])
        }
        Variant::ByDiagonal => {
            let r = sorted_uniforms(n, seed, false);
            WinMatrix::from_upper(n, kind, |i, j| 0.5 + 0.5 * r[n - j + i - 1])
        }
        Variant::ByEntry => {
            let mut rng = rng::stream(seed, streams::MATRIX);
            WinMatrix::from_upper(n, kind, |_, _| 0.5 + 0.5 * rng.random::<f64>())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive triple check, independent of the adjacent-row shortcut.
    fn sst_brute(m: &WinMatrix) -> bool {
        let n = m.n();
        (0..n).all(|i| (i + 1..n).all(|j| (0..n).all(|k| m.get(i, k) >= m.get(j, k))))
    }

    #[test]
    fn bt_examples() {
        let m = bt_from_scores(&[0.0, 0.0, 0.0]);
        assert!(m.rows().iter().flatten().all(|&v| v == 0.5));
        let m = bt_from_scores(&[3f64.ln(), 0.0]);
        assert!((m.get(0, 1) - 0.75).abs() < 1e-15);
        let (m, theta) = gen_bt_matrix(20, 4).unwrap();
        assert!(theta.iter().all(|t| (-2.0..=2.0).contains(t)));
        let mut order: Vec<usize> = (0..20).collect();
        order.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));
        assert!(m.is_sst_for(&order) && m.is_wst_for(&order));
    }

    #[test]
    fn sst_byentry_is_constant() {
        let m = gen_sst(7, Variant::ByEntry, 0).unwrap();
        for i in 0..7 {
            for j in i + 1..7 {
                assert_eq!(m.get(i, j), 0.6);
            }
        }
    }

    #[test]
    fn sst_byrow_rows_constant_and_sorted() {
        let m = gen_sst(6, Variant::ByRow, 9).unwrap();
        let r = sorted_uniforms(6, 9, true);
        for (i, &ri) in r.iter().enumerate() {
            for j in i + 1..6 {
                assert_eq!(m.get(i, j), 0.5 + 0.5 * ri);
            }
        }
    }

    #[test]
    fn generators_satisfy_declared_class() {
        for seed in 0..5 {
            for n in [2, 3, 10, 50] {
                for v in [Variant::ByRow, Variant::ByDiagonal, Variant::ByEntry] {
                    let s = gen_sst(n, v, seed).unwrap();
                    s.validate(0.0).unwrap();
                    assert!(sst_brute(&s), "sst {v:?} n={n}");
                    assert!(s.is_sst() && s.is_wst());
                    let w = gen_wst(n, v, seed).unwrap();
                    w.validate(0.0).unwrap();
                    assert!(w.is_wst(), "wst {v:?} n={n}");
                    assert_eq!(w.is_sst(), sst_brute(&w));
                }
            }
        }
    }

    #[test]
    fn wst_byrow_and_byentry_usually_break_sst() {
        let broken = (0..20)
            .filter(|&s| !gen_wst(10, Variant::ByRow, s).unwrap().is_sst())
            .count();
        assert_eq!(broken, 20);
        let broken = (0..20)
            .filter(|&s| !gen_wst(10, Variant::ByEntry, s).unwrap().is_sst())
            .count();
        assert_eq!(broken, 20);
    }

    #[test]
    fn wst_byentry_three_player_witness() {
        // seed 0: P[0][2] ≈ 0.524 < P[1][2] ≈ 0.617, so player 1 does better
        // against player 2 than the stronger player 0 does
        let m = gen_wst(3, Variant::ByEntry, 0).unwrap();
        assert!(m.is_wst());
        assert!(m.get(0, 2) < m.get(1, 2));
        assert!(!sst_brute(&m));
    }

    #[test]
    fn unknown_variant_rejected() {
        assert!("bycolumn".parse::<Variant>().is_err());
        assert_eq!("ByRow".parse::<Variant>().unwrap(), Variant::ByRow);
    }

    #[test]
    fn blend_stays_valid() {
        let a = gen_sst(8, Variant::ByRow, 1).unwrap();
        let b = a.reversed();
        for k in 0..=10 {
            a.blend(&b, k as f64 / 10.0).validate(1e-12).unwrap();
        }
    }

    #[test]
    fn csv_round_trip_and_labels() {
        let m = gen_wst(4, Variant::ByEntry, 2).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let (rows, labels) = read_matrix_csv(buf.as_slice()).unwrap();
        assert!(labels.is_none());
        assert_eq!(
            WinMatrix::from_rows(&rows, MatrixKind::Custom).unwrap().rows(),
            m.rows()
        );

        let text = ",a,b\na,0.5,0.7\nb,0.3,0.5\n";
        let (rows, labels) = read_matrix_csv(text.as_bytes()).unwrap();
        assert_eq!(labels.unwrap(), vec!["a", "b"]);
        assert_eq!(rows, vec![vec![0.5, 0.7], vec![0.3, 0.5]]);

        let text = ",1,2\n1,0.5,0.7\n2,0.3,0.5\n";
        let (rows, labels) = read_matrix_csv(text.as_bytes()).unwrap();
        assert_eq!(labels.unwrap(), vec!["1", "2"]);
        assert_eq!(rows, vec![vec![0.5, 0.7], vec![0.3, 0.5]]);
    }
}
