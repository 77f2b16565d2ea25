use proptest::prelude::*;

use ratelab::data::symmetrize;
use ratelab::evaluation::hindsight_bt;
use ratelab::logit::{NewtonOptions, Observation, PairLogit};
use ratelab::ranking::tau_consistency;
use ratelab::raters::{Elo, Elo2k, Glicko, LearningRate, Pairwise, TrueSkill};
use ratelab::synthetic::{gen_sst, gen_wst, Variant};
use ratelab::{Dataset, Rater};

const N: usize = 6;

fn games(max_len: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..N, 1..N, 0u8..3), 1..max_len).prop_map(|v| {
        v.into_iter()
            .map(|(i, off, o)| (i, (i + off) % N, f64::from(o) / 2.0))
            .collect()
    })
}

fn raters() -> Vec<Box<dyn Rater>> {
    let rate = LearningRate::Constant { eta: 0.3 };
    vec![
        Box::new(Elo::new(N, rate)),
        Box::new(Glicko::new(N, 350.0)),
        Box::new(TrueSkill::new(N, 1.0)),
        Box::new(Elo2k::new(N, 2, rate, 9)),
        Box::new(Pairwise::new(N)),
    ]
}

proptest! {
    #[test]
    fn predictions_are_antisymmetric(seq in games(200)) {
        for mut r in raters() {
            for (t, &(i, j, o)) in seq.iter().enumerate() {
                r.update(i, j, o, t + 1).unwrap();
                for a in 0..N {
                    for b in 0..N {
                        if a != b {
                            prop_assert!((r.predict(a, b) + r.predict(b, a) - 1.0).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn elo_conserves_total_score(seq in games(500), eta in 0.001f64..1.0) {
        let mut e = Elo::new(N, LearningRate::Constant { eta });
        for (t, &(i, j, o)) in seq.iter().enumerate() {
            e.update(i, j, o, t + 1).unwrap();
        }
        prop_assert!(e.theta.iter().sum::<f64>().abs() <= 1e-12);
    }

    #[test]
    fn elo_loss_is_convex_along_segments(
        a in prop::collection::vec(-4.0f64..4.0, N),
        b in prop::collection::vec(-4.0f64..4.0, N),
        o in 0.0f64..=1.0,
    ) {
        let rate = LearningRate::Constant { eta: 0.1 };
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let f = |th: &[f64]| Elo::with_scores(th.to_vec(), rate).loss(0, 1, o);
        prop_assert!(f(&mid) <= 0.5 * (f(&a) + f(&b)) + 1e-12);
    }

    #[test]
    fn uncertainty_never_grows(seq in games(200)) {
        let mut g = Glicko::new(N, 350.0);
        let mut ts = TrueSkill::new(N, 1.0);
        for (t, &(i, j, o)) in seq.iter().enumerate() {
            let before = (g.deviation.clone(), ts.uncertainty.clone());
            g.update(i, j, o, t + 1).unwrap();
            ts.update(i, j, o, t + 1).unwrap();
            prop_assert!(g.deviation[i] < before.0[i] && g.deviation[j] < before.0[j]);
            prop_assert!(ts.uncertainty[i] < before.1[i] && ts.uncertainty[j] < before.1[j]);
        }
    }

    #[test]
    fn pairwise_counts_are_consistent(seq in games(300)) {
        let mut p = Pairwise::new(N);
        for (t, &(i, j, o)) in seq.iter().enumerate() {
            p.update(i, j, o, t + 1).unwrap();
        }
        for a in 0..N {
            for b in 0..N {
                if a != b {
                    prop_assert!((p.wins(a, b) + p.wins(b, a) - p.count(a, b) as f64).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn replays_are_deterministic(seq in games(200)) {
        let run = || {
            let mut r = Elo2k::new(N, 3, LearningRate::Decaying { a: 1.0, b: 0.0 }, 5);
            for (t, &(i, j, o)) in seq.iter().enumerate() {
                r.update(i, j, o, t + 1).unwrap();
            }
            (r.u, r.v)
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn elo_is_gauge_invariant(seq in games(200), shift in -5.0f64..5.0) {
        let rate = LearningRate::Constant { eta: 0.2 };
        let mut a = Elo::new(N, rate);
        let mut b = Elo::with_scores(vec![shift; N], rate);
        for (t, &(i, j, o)) in seq.iter().enumerate() {
            a.update(i, j, o, t + 1).unwrap();
            b.update(i, j, o, t + 1).unwrap();
        }
        for (x, y) in a.theta.iter().zip(&b.theta) {
            prop_assert!((y - x - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn bt_fit_does_not_depend_on_the_pinned_player(seq in games(300)) {
        // one draw per pair keeps the maximum likelihood estimate finite
        let draws = (0..N).flat_map(|i| (i + 1..N).map(move |j| (i, j, 0.5)));
        let obs: Vec<Observation> = seq
            .iter()
            .copied()
            .chain(draws)
            .map(|(i, j, o)| Observation { i, j, o, weight: 1.0 })
            .collect();
        let fit = |p| PairLogit::new(N, &obs).with_pinned(Some(p)).fit(NewtonOptions::default()).unwrap();
        let (a, b) = (fit(0), fit(N - 1));
        prop_assert!((a.loss - b.loss).abs() < 1e-9);
        for k in 1..N {
            prop_assert!((a.theta[k] - a.theta[0] - (b.theta[k] - b.theta[0])).abs() < 1e-6);
        }
    }

    #[test]
    fn tau_is_relabeling_invariant(n in 3usize..12, seed in 0u64..1000, perm_seed in 0u64..1000) {
        let p = gen_sst(n, Variant::ByEntry, seed).unwrap().rows();
        let q = gen_wst(n, Variant::ByEntry, seed + 1).unwrap().rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = perm_seed;
        for k in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(k, (state >> 33) as usize % (k + 1));
        }
        let relabel = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| m[perm[i]][perm[j]]).collect()).collect()
        };
        let a = tau_consistency(&p, &q);
        let b = tau_consistency(&relabel(&p), &relabel(&q));
        prop_assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn symmetrize_preserves_games(seq in games(300), seed in 0u64..1000) {
        let d = Dataset::from_triples("d", N, seq.clone()).unwrap();
        let s = symmetrize(&d, seed);
        prop_assert_eq!(s.len(), d.len());
        for (a, b) in d.games.iter().zip(&s.games) {
            let same = a.i == b.i && a.j == b.j && a.o == b.o;
            let swapped = a.i == b.j && a.j == b.i && a.o == 1.0 - b.o;
            prop_assert!(same || swapped);
        }
    }

    #[test]
    fn hindsight_loss_is_at_most_any_fixed_model(seq in games(300), theta in prop::collection::vec(-2.0f64..2.0, N)) {
        let d = Dataset::from_triples("d", N, seq).unwrap();
        let fit = hindsight_bt(&d, 1e-9).unwrap();
        let fixed = Elo::with_scores(theta, LearningRate::Constant { eta: 0.0 });
        let other: f64 = d.games.iter().map(|g| fixed.loss(g.i, g.j, g.o)).sum();
        prop_assert!(fit.loss <= other + 1e-6);
    }
}
