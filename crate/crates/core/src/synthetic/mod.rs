//! Synthetic game data: ground-truth win matrices, matchmaking schedules,
//! drifting strengths, outcome sampling and payoff-matrix conversion.

mod matrix;
mod payoff;
mod schedule;

pub use matrix::{
    bt_from_scores, gen_bt_matrix, gen_sst, gen_wst, read_matrix_csv, LabeledRows, MatrixKind, Variant, WinMatrix,
};
pub use payoff::{payoff_to_games, read_payoff_csv, PayoffMatrix, PayoffMode};
pub use schedule::{
    sample_outcomes, schedule_elo_window, schedule_fixed, schedule_uniform, MatchSchedule, Scheme, StrengthPath,
    WinProbability, WINDOW_ELO_RATE,
};
