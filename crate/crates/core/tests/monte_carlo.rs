//! Calibration and power of the statistical tests on synthetic data.

use rand::Rng as _;
use rayon::prelude::*;

use ratelab::bttest::{
    bootstrap_permutation, correlation_test, features_score, lr_test, LowRankOptions, LrFeatures, LrTestOptions,
    SCORE_TRAIN_LAMBDA,
};
use ratelab::data::{split_random, symmetrize};
use ratelab::math::sigmoid;
use ratelab::rng;
use ratelab::synthetic::{
    gen_bt_matrix, gen_sst, sample_outcomes, schedule_elo_window, schedule_uniform, MatrixKind, StrengthPath, Variant,
    WinMatrix,
};
use ratelab::Dataset;

fn bt_games(n: usize, t: usize, seed: u64) -> Dataset {
    let (m, _) = gen_bt_matrix(n, seed).unwrap();
    sample_outcomes(&m, &schedule_uniform(n, t, seed).unwrap(), seed, "bt").unwrap()
}

fn share<T>(xs: &[T], pred: impl Fn(&T) -> bool) -> f64 {
    xs.iter().filter(|x| pred(x)).count() as f64 / xs.len() as f64
}

#[test]
fn score_statistic_behaves_like_one_degree_of_freedom() {
    // after symmetrization only the difference of the two score features is
    // identifiable next to θ, so Λ is χ²₁ (mean 1) under the null
    let stats: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            lr_test(&bt_games(50, 100_000, seed), LrTestOptions::score(), seed)
                .unwrap()
                .statistic
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / stats.len() as f64;
    assert!((mean - 1.0).abs() < 0.3, "mean Λ {mean}");
}

#[test]
fn martingale_test_is_calibrated_on_stationary_bt_data() {
    let opts = LrTestOptions {
        features: LrFeatures::Martingale { eta: 0.01 },
        ..LrTestOptions::score()
    };
    let p: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|seed| lr_test(&bt_games(50, 100_000, seed), opts, seed).unwrap().p_value)
        .collect();
    let rate = share(&p, |&p| p < 0.05);
    assert!(rate <= 0.08, "rejection rate {rate}");
}

#[test]
fn lowrank_test_detects_a_planted_rank_one_model() {
    let n = 30;
    let opts = LrTestOptions {
        features: LrFeatures::LowRank(LowRankOptions::default()),
        ..LrTestOptions::score()
    };
    let p: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let mut r = rng::stream(seed, 1);
            let u: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let m = WinMatrix::from_upper(n, MatrixKind::Custom, |i, j| sigmoid(u[i] * v[j] - u[j] * v[i]));
            let d = sample_outcomes(&m, &schedule_uniform(n, 100_000, seed).unwrap(), seed, "rank1").unwrap();
            lr_test(&d, opts, seed).unwrap().p_value
        })
        .collect();
    let power = share(&p, |&p| p < 0.01);
    assert!(power >= 0.9, "power {power}");
}

#[test]
fn correlation_is_null_under_uniform_matchmaking() {
    // large N keeps the no-self-play bias −1/(N−1) far below the noise
    let n = 1000;
    let r: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let d = symmetrize(&bt_games(n, 200_000, seed), seed);
            let split = split_random(&d, seed).unwrap();
            let (_, theta) = features_score(&d, &split, SCORE_TRAIN_LAMBDA).unwrap();
            let rep = correlation_test(&d, &split, &theta).unwrap();
            (rep.statistic, rep.p_value)
        })
        .collect();
    let ok = share(&r, |&(r, p)| r.abs() < 0.01 && p > 0.001);
    assert!(ok >= 0.95, "share {ok}");
}

#[test]
fn correlation_is_positive_under_skill_window_matchmaking() {
    let n = 100;
    for seed in 0..3 {
        let m = gen_sst(n, Variant::ByRow, seed).unwrap();
        let (_, d) = schedule_elo_window(&m, 100_000, n / 5, seed, "window").unwrap();
        let d = symmetrize(&d, seed);
        let split = split_random(&d, seed).unwrap();
        let (_, theta) = features_score(&d, &split, SCORE_TRAIN_LAMBDA).unwrap();
        let rep = correlation_test(&d, &split, &theta).unwrap();
        assert!(
            rep.statistic > 0.2 && rep.p_value < 1e-10,
            "r {} p {}",
            rep.statistic,
            rep.p_value
        );
    }
}

#[test]
fn permutation_test_size_and_power() {
    let (n, t) = (20, 10_000);
    let run = |drift: bool| -> Vec<f64> {
        (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let m = gen_sst(n, Variant::ByRow, seed).unwrap();
                let schedule = schedule_uniform(n, t, seed).unwrap();
                let d = if drift {
                    let path = StrengthPath::new(m.clone(), m.reversed(), t).unwrap();
                    sample_outcomes(&path, &schedule, seed, "drift").unwrap()
                } else {
                    sample_outcomes(&m, &schedule, seed, "stationary").unwrap()
                };
                bootstrap_permutation(&d, 0.01, 99, seed).unwrap().report.p_value
            })
            .collect()
    };
    let size = share(&run(false), |&p| p <= 0.05);
    let power = share(&run(true), |&p| p <= 0.05);
    assert!(size <= 0.10, "size {size}");
    assert!(power >= 0.8, "power {power}");
}
