//! Online rating systems and the experiments around them.
//!
//! * [`raters`]: Elo, Glicko, TrueSkill, Elo2k and Pairwise behind one
//!   predict/update interface.
//! * [`evaluation`]: online replay with cumulative cross-entropy, hindsight
//!   baselines, regret and hyperparameter selection.
//! * [`synthetic`]: BT / SST / WST win matrices, matchmaking schedules,
//!   drifting strengths and payoff-matrix conversion.
//! * [`bttest`]: likelihood-ratio tests of the Bradley-Terry model, the
//!   matchmaking correlation test and the permutation test for
//!   non-stationarity.
//! * [`ranking`]: pairwise consistency, win-rate ranking, population MLE and
//!   bootstrap intervals.
//!
//! Game logs live in [`data`]; all randomness is drawn from [`rng`] streams.

pub mod bttest;
pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod logit;
pub mod math;
pub mod output;
pub mod ranking;
pub mod raters;
pub mod rng;
pub mod synthetic;

pub use data::{Dataset, GameRecord, SplitDataset};
pub use error::{Error, Result};
pub use raters::{Algorithm, LearningRate, Rater, RaterSpec};
