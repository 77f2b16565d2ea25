//! Hypothesis tests on game data: likelihood-ratio tests of the
//! Bradley-Terry model with augmented features, the matchmaking
//! correlation test and a permutation test for non-stationarity.

mod features;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub use features::{
    features_lowrank, features_martingale, features_score, fit_lowrank, select_rows, LowRankFit, LowRankOptions,
    SCORE_TRAIN_LAMBDA,
};

use crate::data::{split_random, symmetrize, Dataset, SplitDataset};
use crate::error::{Error, Result};
use crate::logit::{NewtonOptions, Observation, PairLogit};
use crate::raters::{Elo, LearningRate, Rater};
use crate::rng::{self, streams};

/// Scale applied to the χ² reference distribution.
pub const DEFAULT_CORRECTION: f64 = 1.25;
/// Smallest reported p-value.
pub const P_FLOOR: f64 = 1e-300;
/// Ridge strengths tried, in order, for the fits on the test half.
pub const TEST_LAMBDAS: [f64; 3] = [0.0, 0.01, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Negative log-likelihood on the fitted games.
    pub loss: f64,
    /// Penalized objective.
    pub objective: f64,
    pub grad_norm: f64,
}

/// BT logistic regression with optional per-game features (row-major,
/// `features.1` columns) and ridge `λ`.
pub fn fit_logistic(
    n_players: usize,
    obs: &[Observation],
    features: Option<(&[f64], usize)>,
    lambda: f64,
) -> Result<LogisticFit> {
    if lambda < 0.0 {
        return Err(Error::invalid(format!(
            "ridge strength must be nonnegative, got {lambda}"
        )));
    }
    let mut problem = PairLogit::new(n_players, obs).with_lambda(lambda);
    if let Some((g, m)) = features {
        problem = problem.with_features(g, m);
    }
    let fit = problem.fit(NewtonOptions::default())?;
    Ok(LogisticFit {
        theta: fit.theta,
        alpha: fit.alpha,
        loss: fit.loss,
        objective: fit.objective,
        grad_norm: fit.grad_norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_kind: String,
    pub statistic: f64,
    pub dof: usize,
    pub correction: f64,
    pub p_value: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl TestReport {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Survival function of `c·χ²₂` at `Λ`, floored at [`P_FLOOR`].
pub fn chi2_2_pvalue(statistic: f64, correction: f64) -> f64 {
    (-statistic / (2.0 * correction)).exp().clamp(P_FLOOR, 1.0)
}

/// Twice the drop in test-half loss from adding the features `g` (two
/// columns per test game). Both nested fits use the first ridge strength in
/// [`TEST_LAMBDAS`] for which both converge; with a positive ridge the
/// statistic compares penalized objectives.
pub fn lr_statistic(n_players: usize, test_obs: &[Observation], g: &[f64]) -> Result<(f64, f64)> {
    let mut last_err = None;
    for lambda in TEST_LAMBDAS {
        let base = fit_logistic(n_players, test_obs, None, lambda);
        let aug = fit_logistic(n_players, test_obs, Some((g, 2)), lambda);
        match (base, aug) {
            (Ok(b), Ok(a)) => {
                let stat = 2.0 * (b.objective - a.objective);
                if stat < -1e-6 {
                    return Err(Error::Numerical(format!(
                        "augmented fit is worse than the base fit (statistic {stat:e})"
                    )));
                }
                return Ok((stat.max(0.0), lambda));
            }
            (Err(e), _) | (_, Err(e)) => {
                if !matches!(e, Error::NoConvergence { .. } | Error::Numerical(_)) {
                    return Err(e);
                }
                log::debug!("test-half fit failed at lambda={lambda}: {e}");
                last_err = Some(e);
            }
        }
    }
    Err(last_err.expect("at least one lambda tried"))
}

/// Which features to add in a likelihood-ratio test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrFeatures {
    Score { lambda_train: f64 },
    LowRank(LowRankOptions),
    Martingale { eta: f64 },
}

impl LrFeatures {
    pub fn kind(&self) -> &'static str {
        match self {
            LrFeatures::Score { .. } => "lr-score",
            LrFeatures::LowRank(_) => "lr-lowrank",
            LrFeatures::Martingale { .. } => "lr-martingale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrTestOptions {
    pub features: LrFeatures,
    pub correction: f64,
    pub symmetrize: bool,
}

impl LrTestOptions {
    pub fn score() -> Self {
        LrTestOptions {
            features: LrFeatures::Score {
                lambda_train: SCORE_TRAIN_LAMBDA,
            },
            correction: DEFAULT_CORRECTION,
            symmetrize: true,
        }
    }
}

/// Full pipeline: optional symmetrization, random half split, features,
/// nested fits on the test half.
pub fn lr_test(d: &Dataset, opts: LrTestOptions, seed: u64) -> Result<TestReport> {
    let data = if opts.symmetrize {
        symmetrize(d, seed)
    } else {
        d.clone()
    };
    let split = split_random(&data, seed)?;
    lr_test_on_split(&data, &split, opts, seed)
}

pub fn lr_test_on_split(d: &Dataset, split: &SplitDataset, opts: LrTestOptions, seed: u64) -> Result<TestReport> {
    let mut params = BTreeMap::new();
    params.insert("dataset".to_string(), d.name.clone().into());
    params.insert("seed".to_string(), seed.into());
    params.insert("symmetrize".to_string(), opts.symmetrize.into());
    let g = match opts.features {
        LrFeatures::Score { lambda_train } => {
            params.insert("lambda_train".into(), lambda_train.into());
            features_score(d, split, lambda_train)?.0
        }
        LrFeatures::LowRank(lr) => {
            let fit = fit_lowrank(d, split, lr, seed);
            params.insert("lowrank_iterations".into(), fit.iterations.into());
            features_lowrank(d, split, &fit)
        }
        LrFeatures::Martingale { eta } => {
            params.insert("eta".into(), eta.into());
            select_rows(&features_martingale(d, eta)?, &split.test)
        }
    };
    let test_obs: Vec<Observation> = split.test.iter().map(|&k| Observation::from(&d.games[k])).collect();
    let (statistic, lambda) = lr_statistic(d.n_players, &test_obs, &g)?;
    params.insert("lambda_test".into(), lambda.into());
    Ok(TestReport {
        test_kind: opts.features.kind().to_string(),
        statistic,
        dof: 2,
        correction: opts.correction,
        p_value: chi2_2_pvalue(statistic, opts.correction),
        n_train: split.train.len(),
        n_test: split.test.len(),
        params,
    })
}

/// Pearson correlation of the two players' training scores over the test
/// games, with a two-sided Student-t p-value.
pub fn correlation_test(d: &Dataset, split: &SplitDataset, theta_train: &[f64]) -> Result<TestReport> {
    let m = split.test.len();
    if m < 3 {
        return Err(Error::invalid(format!(
            "correlation needs at least 3 test games, got {m}"
        )));
    }
    let x: Vec<f64> = split.test.iter().map(|&k| theta_train[d.games[k].i]).collect();
    let y: Vec<f64> = split.test.iter().map(|&k| theta_train[d.games[k].j]).collect();
    let r = pearson(&x, &y)?;
    let dof = m - 2;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (dof as f64 / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
        2.0 * dist.sf(t.abs())
    };
    let mut params = BTreeMap::new();
    params.insert("dataset".to_string(), d.name.clone().into());
    params.insert("r".to_string(), r.into());
    Ok(TestReport {
        test_kind: "correlation".into(),
        statistic: r,
        dof,
        correction: 1.0,
        p_value: p.clamp(P_FLOOR, 1.0),
        n_train: split.train.len(),
        n_test: m,
        params,
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numerical(
            "correlation undefined: a sequence has zero variance".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Numerical("cosine similarity of an all-zero score vector".into()));
    }
    Ok(dot / (na * nb))
}

fn elo_scores(d: &Dataset, order: &[usize], eta: f64) -> Result<Vec<f64>> {
    let mut elo = Elo::new(d.n_players, LearningRate::Constant { eta });
    for (t, &k) in order.iter().enumerate() {
        let g = &d.games[k];
        elo.update(g.i, g.j, g.o, t + 1)?;
    }
    Ok(elo.theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationTest {
    pub report: TestReport,
    /// Cosine similarity of the chronological scores to the permutation mean.
    pub original_similarity: f64,
    pub permuted_similarities: Vec<f64>,
    pub original_scores: Vec<f64>,
    pub mean_permuted_scores: Vec<f64>,
}

/// Compares constant-η Elo scores on the recorded order with scores on `b`
/// random reorderings. Small p-values mean the recorded order is unusually
/// far from the permutation mean.
pub fn bootstrap_permutation(d: &Dataset, eta: f64, b: usize, seed: u64) -> Result<PermutationTest> {
    if b < 1 {
        return Err(Error::invalid("permutation test needs B >= 1"));
    }
    let identity: Vec<usize> = (0..d.len()).collect();
    let original = elo_scores(d, &identity, eta)?;
    let permuted: Vec<Vec<f64>> = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut order = identity.clone();
            order.shuffle(&mut rng::stream(
                seed,
                streams::PERMUTATION + streams::REPLICATE_BASE * r as u64,
            ));
            elo_scores(d, &order, eta)
        })
        .collect::<Result<_>>()?;
    let mean: Vec<f64> = (0..d.n_players)
        .map(|p| permuted.iter().map(|th| th[p]).sum::<f64>() / b as f64)
        .collect();
    let sim0 = cosine(&original, &mean)?;
    let sims: Vec<f64> = permuted.iter().map(|th| cosine(th, &mean)).collect::<Result<_>>()?;
    let below = sims.iter().filter(|&&s| s <= sim0).count();
    let p = (1 + below) as f64 / (b + 1) as f64;
    let mut params = BTreeMap::new();
    params.insert("dataset".to_string(), d.name.clone().into());
    params.insert("eta".to_string(), eta.into());
    params.insert("permutations".to_string(), b.into());
    params.insert("seed".to_string(), seed.into());
    Ok(PermutationTest {
        report: TestReport {
            test_kind: "bootstrap-permutation".into(),
            statistic: sim0,
            dof: 0,
            correction: 1.0,
            p_value: p,
            n_train: 0,
            n_test: d.len(),
            params,
        },
        original_similarity: sim0,
        permuted_similarities: sims,
        original_scores: original,
        mean_permuted_scores: mean,
    })
}

/// Fraction of reports with `p < alpha`.
pub fn rejection_rate(reports: &[TestReport], alpha: f64) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().filter(|r| r.rejects(alpha)).count() as f64 / reports.len() as f64
}

/// Column label of a report in [`format_table`].
pub fn column_label(r: &TestReport) -> String {
    match r.params.get("eta") {
        Some(eta) => format!("{} eta={eta}", r.test_kind),
        None => r.test_kind.clone(),
    }
}

/// Plain-text table: one row per dataset, one `Λ / p` column pair per test.
pub fn format_table(reports: &[TestReport]) -> String {
    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, String), &TestReport> = BTreeMap::new();
    for r in reports {
        let row = r
            .params
            .get("dataset")
            .and_then(|v| v.as_str())
            .unwrap_or("-")
            .to_string();
        let col = column_label(r);
        if !rows.contains(&row) {
            rows.push(row.clone());
        }
        if !cols.contains(&col) {
            cols.push(col.clone());
        }
        cells.insert((row, col), r);
    }
    let width = rows.iter().map(String::len).max().unwrap_or(7).max(7);
    let mut out = String::new();
    let _ = write!(out, "{:width$}", "dataset");
    for c in &cols {
        let _ = write!(out, " | {:>24}", c);
    }
    out.push('\n');
    let _ = write!(out, "{:width$}", "");
    for _ in &cols {
        let _ = write!(out, " | {:>11} {:>12}", "statistic", "p");
    }
    out.push('\n');
    for row in &rows {
        let _ = write!(out, "{row:width$}");
        for c in &cols {
            match cells.get(&(row.clone(), c.clone())) {
                Some(r) => {
                    let _ = write!(out, " | {:>11.4} {:>12.3e}", r.statistic, r.p_value);
                }
                None => {
                    let _ = write!(out, " | {:>24}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{bt_from_scores, sample_outcomes, schedule_uniform};

    #[test]
    fn pvalue_closed_form() {
        assert!((chi2_2_pvalue(5.99146, 1.0) - 0.05).abs() < 1e-6);
        assert_eq!(chi2_2_pvalue(0.0, 1.25), 1.0);
        assert!(chi2_2_pvalue(2020.1, 1.25) < 1e-10);
        assert_eq!(chi2_2_pvalue(1e6, 1.25), P_FLOOR);
    }

    #[test]
    fn pvalue_matches_integrated_density() {
        // Simpson's rule on the scaled χ²₂ density e^{-x/(2c)}/(2c)
        let c = 1.25;
        let x0 = 3.7;
        let upper = x0 + 200.0;
        let n = 200_000;
        let h = (upper - x0) / n as f64;
        let f = |x: f64| (-x / (2.0 * c)).exp() / (2.0 * c);
        let mut s = f(x0) + f(upper);
        for k in 1..n {
            s += f(x0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        assert!((s * h / 3.0 - chi2_2_pvalue(x0, c)).abs() < 1e-10);
    }

    #[test]
    fn two_player_fit() {
        let obs: Vec<Observation> = (0..40)
            .map(|k| Observation {
                i: 0,
                j: 1,
                o: if k < 30 { 1.0 } else { 0.0 },
                weight: 1.0,
            })
            .collect();
        let f = fit_logistic(2, &obs, None, 0.0).unwrap();
        assert!((f.theta[0] - f.theta[1] - 3f64.ln()).abs() < 1e-6);
        let r = fit_logistic(2, &obs, None, 1e6).unwrap();
        assert!(r.theta.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-3);
    }

    #[test]
    fn zero_features_give_zero_statistic() {
        let m = bt_from_scores(&[0.4, 0.0, -0.3, 0.9]);
        let d = sample_outcomes(&m, &schedule_uniform(4, 400, 1).unwrap(), 1, "x").unwrap();
        let obs: Vec<Observation> = d.games.iter().map(Observation::from).collect();
        let (stat, _) = lr_statistic(4, &obs, &vec![0.0; 800]).unwrap();
        assert!(stat.abs() < 1e-9);
        assert_eq!(chi2_2_pvalue(stat, 1.25), 1.0);
    }

    #[test]
    fn score_pipeline_report() {
        let m = bt_from_scores(&[0.4, 0.0, -0.3, 0.9, -1.0]);
        let d = sample_outcomes(&m, &schedule_uniform(5, 2000, 2).unwrap(), 2, "bt").unwrap();
        let r = lr_test(&d, LrTestOptions::score(), 2).unwrap();
        assert_eq!(r.test_kind, "lr-score");
        assert_eq!(r.n_train + r.n_test, 2000);
        assert!((0.0..=1.0).contains(&r.p_value));
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "test_kind",
            "statistic",
            "dof",
            "correction",
            "p_value",
            "n_train",
            "n_test",
            "params",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn identical_pairs_correlate() {
        let d = Dataset::from_triples("d", 4, (0..12).map(|k| (k % 4, (k + 1) % 4, 1.0))).unwrap();
        let split = crate::data::split_random(&d, 0).unwrap();
        let theta = [1.0, 1.0, 1.0, 1.0];
        assert!(correlation_test(&d, &split, &theta).is_err());
        assert!((pearson(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_game_permutation() {
        let d = Dataset::from_triples("d", 2, [(0, 1, 1.0)]).unwrap();
        let r = bootstrap_permutation(&d, 0.1, 19, 0).unwrap();
        assert_eq!(r.report.p_value, 1.0);
    }

    #[test]
    fn table_layout() {
        let mut params = BTreeMap::new();
        params.insert("dataset".to_string(), serde_json::Value::from("chess"));
        let r = TestReport {
            test_kind: "lr-score".into(),
            statistic: 2020.1,
            dof: 2,
            correction: 1.25,
            p_value: chi2_2_pvalue(2020.1, 1.25),
            n_train: 1,
            n_test: 1,
            params,
        };
        let t = format_table(&[r]);
        assert!(t.contains("chess"));
        assert!(t.contains("2020.1000"));
    }
}
