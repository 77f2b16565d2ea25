//! Online replay: every game is predicted from the games before it, scored
//! by cross-entropy, then fed to the rater.

mod hindsight;
mod selection;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use hindsight::{hindsight_bt, hindsight_elo2k, Elo2kOptions, HindsightBt, HindsightElo2k};
pub use selection::{select_hyperparams, selection_loss, SELECTION_PENALTY};

use crate::data::{Dataset, GameRecord};
use crate::error::Result;
use crate::math::cross_entropy;
use crate::ranking::tau_consistency;
use crate::raters::{prediction_matrix, Rater, RaterSpec};
use crate::synthetic::WinMatrix;

pub const DEFAULT_CHECKPOINTS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    pub cum_loss: f64,
    pub avg_loss: f64,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTrace {
    pub algorithm: String,
    pub params: String,
    pub dataset: String,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

impl EvalTrace {
    pub fn final_checkpoint(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    /// Cumulative loss over the whole replay.
    pub fn total_loss(&self) -> f64 {
        self.final_checkpoint().map_or(0.0, |c| c.cum_loss)
    }

    pub fn horizon(&self) -> usize {
        self.final_checkpoint().map_or(0, |c| c.t)
    }

    pub fn avg_losses(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.avg_loss).collect()
    }
}

/// `n` checkpoint times evenly spaced over `1..=t`, ending at `t`. Fewer are
/// returned when `t < n`.
pub fn checkpoint_times(t: usize, n: usize) -> Vec<usize> {
    let mut times: Vec<usize> = (1..=n).map(|k| (k * t).div_ceil(n)).filter(|&x| x > 0).collect();
    times.dedup();
    times
}

#[derive(Debug, Clone, Copy)]
pub struct ReplayOptions<'a> {
    pub n_checkpoints: usize,
    /// Explicit checkpoint times; overrides `n_checkpoints`.
    pub times: Option<&'a [usize]>,
    /// Ground truth for the τ column.
    pub truth: Option<&'a WinMatrix>,
}

impl Default for ReplayOptions<'_> {
    fn default() -> Self {
        ReplayOptions {
            n_checkpoints: DEFAULT_CHECKPOINTS,
            times: None,
            truth: None,
        }
    }
}

/// Replays `d` through a fresh rater built from `spec`.
pub fn replay(d: &Dataset, spec: &RaterSpec, seed: u64, opts: ReplayOptions<'_>) -> Result<EvalTrace> {
    let mut rater = spec.build(d.n_players, seed);
    let checkpoints = replay_rater(rater.as_mut(), &d.games, opts)?;
    Ok(EvalTrace {
        algorithm: spec.algorithm().name().to_string(),
        params: spec.params_label(),
        dataset: d.name.clone(),
        seed,
        checkpoints,
    })
}

/// Runs `rater` over `games`, returning cumulative losses at the requested
/// times (positions within `games`, 1-based).
pub fn replay_rater(rater: &mut dyn Rater, games: &[GameRecord], opts: ReplayOptions<'_>) -> Result<Vec<Checkpoint>> {
    let owned;
    let times = match opts.times {
        Some(t) => t,
        None => {
            owned = checkpoint_times(games.len(), opts.n_checkpoints.max(1));
            &owned
        }
    };
    let mut out = Vec::with_capacity(times.len());
    let mut next = times.iter().peekable();
    let mut cum = 0.0;
    for (k, g) in games.iter().enumerate() {
        cum += cross_entropy(g.o, rater.predict(g.i, g.j));
        rater.update(g.i, g.j, g.o, g.t)?;
        let t = k + 1;
        while next.peek().is_some_and(|&&c| c == t) {
            next.next();
            let tau = opts
                .truth
                .map(|p| tau_consistency(&p.rows(), &prediction_matrix(rater)));
            out.push(Checkpoint {
                t,
                cum_loss: cum,
                avg_loss: cum / t as f64,
                tau,
            });
        }
    }
    Ok(out)
}

/// Cumulative replay loss of the whole sequence.
pub fn replay_loss(rater: &mut dyn Rater, games: &[GameRecord]) -> Result<f64> {
    let mut cum = 0.0;
    for g in games {
        cum += cross_entropy(g.o, rater.predict(g.i, g.j));
        rater.update(g.i, g.j, g.o, g.t)?;
    }
    Ok(cum)
}

/// Writes traces as `algo,params,dataset,seed,t,cum_loss,avg_loss[,tau]`.
/// The τ column is present when any checkpoint carries it.
pub fn write_traces_csv<W: Write>(traces: &[EvalTrace], out: W) -> Result<()> {
    let with_tau = traces.iter().any(|tr| tr.checkpoints.iter().any(|c| c.tau.is_some()));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["algo", "params", "dataset", "seed", "t", "cum_loss", "avg_loss"];
    if with_tau {
        header.push("tau");
    }
    w.write_record(&header)?;
    for tr in traces {
        for c in &tr.checkpoints {
            let mut rec = vec![
                tr.algorithm.clone(),
                tr.params.clone(),
                tr.dataset.clone(),
                tr.seed.to_string(),
                c.t.to_string(),
                c.cum_loss.to_string(),
                c.avg_loss.to_string(),
            ];
            if with_tau {
                rec.push(c.tau.map(|x| x.to_string()).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Online loss against the best fixed model in a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub algorithm: String,
    pub params: String,
    pub dataset: String,
    pub model_class: String,
    pub t: usize,
    pub total_loss: f64,
    pub hindsight_loss: f64,
    pub regret: f64,
    pub total_loss_per_step: f64,
    pub hindsight_loss_per_step: f64,
    pub regret_per_step: f64,
}

/// `hindsight_loss` is the summed loss of the in-class optimum on the same games.
pub fn regret_decompose(trace: &EvalTrace, hindsight_loss: f64, model_class: &str) -> RegretReport {
    let total = trace.total_loss();
    let t = trace.horizon();
    let per = |x: f64| if t == 0 { 0.0 } else { x / t as f64 };
    RegretReport {
        algorithm: trace.algorithm.clone(),
        params: trace.params.clone(),
        dataset: trace.dataset.clone(),
        model_class: model_class.to_string(),
        t,
        total_loss: total,
        hindsight_loss,
        regret: total - hindsight_loss,
        total_loss_per_step: per(total),
        hindsight_loss_per_step: per(hindsight_loss),
        regret_per_step: per(total - hindsight_loss),
    }
}

/// Per-step regret bound `1.5·D·G/√T` of online gradient descent with
/// `D = 10√N`, `G = √2`.
pub fn ogd_regret_bound(n_players: usize, t: usize) -> f64 {
    1.5 * 10.0 * std::f64::consts::SQRT_2 * (n_players as f64 / t as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raters::{Elo, LearningRate};
    use crate::synthetic::{bt_from_scores, sample_outcomes, schedule_uniform};

    struct Constant;

    impl Rater for Constant {
        fn n_players(&self) -> usize {
            2
        }
        fn predict(&self, _: usize, _: usize) -> f64 {
            0.5
        }
        fn update(&mut self, _: usize, _: usize, _: f64, _: usize) -> Result<()> {
            Ok(())
        }
        fn snapshot_columns(&self) -> Vec<String> {
            Vec::new()
        }
        fn snapshot_rows(&self) -> Vec<Vec<f64>> {
            Vec::new()
        }
    }

    fn games(outcomes: &[f64]) -> Vec<GameRecord> {
        outcomes
            .iter()
            .enumerate()
            .map(|(k, &o)| GameRecord {
                t: k + 1,
                i: k % 2,
                j: 1 - k % 2,
                o,
            })
            .collect()
    }

    #[test]
    fn checkpoints_are_even() {
        assert_eq!(checkpoint_times(90, 30)[..3], [3, 6, 9]);
        assert_eq!(checkpoint_times(100, 30).len(), 30);
        assert_eq!(*checkpoint_times(100, 30).last().unwrap(), 100);
        assert_eq!(checkpoint_times(5, 30), vec![1, 2, 3, 4, 5]);
        assert!(checkpoint_times(0, 30).is_empty());
    }

    #[test]
    fn coin_prediction_costs_ln2() {
        let g = games(&[1.0, 0.0, 0.5, 1.0, 1.0, 0.0]);
        let cps = replay_rater(
            &mut Constant,
            &g,
            ReplayOptions {
                n_checkpoints: 6,
                ..Default::default()
            },
        )
        .unwrap();
        for c in cps {
            assert!((c.avg_loss - std::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn losses_nondecreasing() {
        let m = bt_from_scores(&[1.0, 0.0, -1.0]);
        let d = sample_outcomes(&m, &schedule_uniform(3, 500, 1).unwrap(), 1, "x").unwrap();
        let spec = RaterSpec::Elo {
            rate: LearningRate::Constant { eta: 0.1 },
        };
        let tr = replay(
            &d,
            &spec,
            0,
            ReplayOptions {
                truth: Some(&m),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(tr.checkpoints.len(), 30);
        assert!(tr.checkpoints.windows(2).all(|w| w[0].cum_loss <= w[1].cum_loss));
        assert!(tr.checkpoints.iter().all(|c| c.tau.is_some()));
    }

    #[test]
    fn concatenated_segments_match() {
        let m = bt_from_scores(&[0.5, 0.0, -0.7, 1.2]);
        let d = sample_outcomes(&m, &schedule_uniform(4, 1000, 2).unwrap(), 3, "x").unwrap();
        let mut whole = Elo::new(4, LearningRate::Decaying { a: 1.0, b: 4.0 });
        let full = replay_loss(&mut whole, &d.games).unwrap();
        let mut split = Elo::new(4, LearningRate::Decaying { a: 1.0, b: 4.0 });
        let a = replay_loss(&mut split, &d.games[..377]).unwrap();
        let b = replay_loss(&mut split, &d.games[377..]).unwrap();
        // left-to-right summation makes this exact
        let mut cum = a;
        let mut rest = Elo::new(4, LearningRate::Decaying { a: 1.0, b: 4.0 });
        replay_loss(&mut rest, &d.games[..377]).unwrap();
        for g in &d.games[377..] {
            cum += cross_entropy(g.o, rest.predict(g.i, g.j));
            rest.update(g.i, g.j, g.o, g.t).unwrap();
        }
        assert_eq!(cum, full);
        assert!((a + b - full).abs() < 1e-9);
        assert_eq!(split, whole);
    }

    #[test]
    fn regret_of_equal_losses_is_zero() {
        let tr = EvalTrace {
            algorithm: "elo".into(),
            params: String::new(),
            dataset: "d".into(),
            seed: 0,
            checkpoints: vec![Checkpoint {
                t: 10,
                cum_loss: 4.0,
                avg_loss: 0.4,
                tau: None,
            }],
        };
        let r = regret_decompose(&tr, 4.0, "bt");
        assert_eq!(r.regret, 0.0);
        assert_eq!(r.total_loss_per_step, 0.4);
    }

    #[test]
    fn bound_constant() {
        assert!((ogd_regret_bound(1, 1) - 21.213203435596427).abs() < 1e-12);
    }

    #[test]
    fn trace_csv_layout() {
        let tr = EvalTrace {
            algorithm: "elo".into(),
            params: "eta=0.1".into(),
            dataset: "d".into(),
            seed: 3,
            checkpoints: vec![Checkpoint {
                t: 1,
                cum_loss: 0.5,
                avg_loss: 0.5,
                tau: None,
            }],
        };
        let mut buf = Vec::new();
        write_traces_csv(&[tr], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "algo,params,dataset,seed,t,cum_loss,avg_loss\nelo,eta=0.1,d,3,1,0.5,0.5\n"
        );
    }
}
