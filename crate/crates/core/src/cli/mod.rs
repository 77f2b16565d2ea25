//! Command-line front end: `generate`, `evaluate`, `test`, `rank`, `report`.
//!
//! Settings come from flags, then from the matching section of a TOML file
//! given with `--config`, then from built-in defaults. Exit codes: 0 success,
//! 1 usage, 2 data error, 3 numerical failure.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OUT_ENV: &str = "RATELAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "ratelab", version, about = "Rating-system experiments")]
pub struct Cli {
    /// TOML file with `[generate]`, `[evaluate]`, `[test]`, `[rank]` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic or payoff-derived game log.
    Generate(GenerateArgs),
    /// Replay raters over a game log, select hyperparameters, report regret.
    Evaluate(EvaluateArgs),
    /// Run hypothesis tests on a game log.
    Test(TestArgs),
    /// Rankings, population MLE and bootstrap intervals.
    Rank(RankArgs),
    /// Summarize the JSON reports in a directory.
    Report(ReportArgs),
}

/// Copies every unset field of `$dst` from `$src`.
macro_rules! fill_from {
    ($dst:expr, $src:expr, [$($f:ident),* $(,)?]) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
    ($dst:expr, $src:expr, vec [$($f:ident),* $(,)?]) => {
        $( if $dst.$f.is_empty() { $dst.$f = $src.$f.clone(); } )*
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateArgs {
    /// bt, sst-{byrow,bydiagonal,byentry}, wst-{byrow,bydiagonal,byentry} or payoff.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// uniform or elo-window.
    #[arg(long)]
    pub matchmaking: Option<String>,
    /// Rank window for elo-window matchmaking (default N/5).
    #[arg(long)]
    pub window: Option<usize>,
    /// `reversed`: strengths drift linearly to the reversed matrix.
    #[arg(long)]
    pub drift: Option<String>,
    /// Payoff matrix CSV for `--model payoff`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// expected or bernoulli.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub copies: Option<usize>,
    /// Base name of the written files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateArgs {
    /// Game log CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Algorithms (default: all five).
    #[arg(long, value_delimiter = ',')]
    pub algos: Vec<String>,
    /// Constant learning rates replacing the default Elo/Elo2k grid.
    #[arg(long, value_delimiter = ',')]
    pub eta: Vec<f64>,
    /// Elo2k dimensions (default 2,4).
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long)]
    pub checkpoints: Option<usize>,
    /// Hindsight baselines: `bt` and/or `elo2k:<k>`.
    #[arg(long, value_delimiter = ',')]
    pub baseline: Vec<String>,
    /// Ground-truth win matrix; adds a τ column to the traces.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub symmetrize: Option<bool>,
    /// Drop players with fewer games (single pass).
    #[arg(long)]
    pub min_games: Option<usize>,
    /// Random restarts of the Elo2k baseline.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Iteration cap of the Elo2k baseline.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// lr-score, lr-lowrank, lr-martingale, correlation, bootstrap.
    #[arg(long, value_delimiter = ',')]
    pub kind: Vec<String>,
    /// Learning rates for lr-martingale and bootstrap (default 0.01,0.08).
    #[arg(long, value_delimiter = ',')]
    pub eta: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub correction: Option<f64>,
    /// Randomly swap sides before testing (default true).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub symmetrize: Option<bool>,
    /// Permutations for the bootstrap test.
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Ridge of the training-half fit behind the score features.
    #[arg(long)]
    pub lambda_train: Option<f64>,
    #[arg(long)]
    pub min_games: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankArgs {
    /// Game log CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Win matrix CSV for the population MLE.
    #[arg(long)]
    pub p: Option<PathBuf>,
    /// Matchmaking matrix CSV for the population MLE.
    #[arg(long)]
    pub q: Option<PathBuf>,
    /// Player held at score 0, by name or index (default: last).
    #[arg(long)]
    pub pin: Option<String>,
    /// Bootstrap replicates for confidence intervals.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Emit a τ trace of an Elo replay; needs `--truth`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub tau: Option<bool>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Constant learning rate of the τ replay.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub checkpoints: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportArgs {
    /// Directory to scan (default: the output directory).
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    out: Option<PathBuf>,
    jobs: Option<usize>,
    generate: GenerateArgs,
    evaluate: EvaluateArgs,
    test: TestArgs,
    rank: RankArgs,
    report: ReportArgs,
}

impl GenerateArgs {
    fn fill(&mut self, c: &GenerateArgs) {
        fill_from!(
            self,
            c,
            [model, n, t, seed, matchmaking, window, drift, input, mode, copies, name]
        );
    }
}

impl EvaluateArgs {
    fn fill(&mut self, c: &EvaluateArgs) {
        fill_from!(
            self,
            c,
            [
                data,
                checkpoints,
                truth,
                seed,
                symmetrize,
                min_games,
                restarts,
                max_iter
            ]
        );
        fill_from!(self, c, vec[algos, eta, k, baseline]);
    }
}

impl TestArgs {
    fn fill(&mut self, c: &TestArgs) {
        fill_from!(
            self,
            c,
            [
                data,
                seed,
                correction,
                symmetrize,
                permutations,
                lambda_train,
                min_games
            ]
        );
        fill_from!(self, c, vec[kind, eta]);
    }
}

impl RankArgs {
    fn fill(&mut self, c: &RankArgs) {
        fill_from!(
            self,
            c,
            [data, p, q, pin, bootstrap, seed, tau, truth, eta, checkpoints]
        );
    }
}

impl ReportArgs {
    fn fill(&mut self, c: &ReportArgs) {
        fill_from!(self, c, [dir]);
    }
}

/// Resolved global settings.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
}

fn load_config(path: &PathBuf) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) => 1,
        Error::NoConvergence { .. } | Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => load_config(p)?,
        None => ConfigFile::default(),
    };
    let jobs = cli.jobs.or(config.jobs);
    if let Some(j) = jobs {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let ctx = Context {
        out: cli.out.or(config.out).unwrap_or_else(|| PathBuf::from("out")),
    };
    match cli.command {
        Command::Generate(mut a) => {
            a.fill(&config.generate);
            commands::generate(&ctx, &a)
        }
        Command::Evaluate(mut a) => {
            a.fill(&config.evaluate);
            commands::evaluate(&ctx, &a)
        }
        Command::Test(mut a) => {
            a.fill(&config.test);
            commands::test(&ctx, &a)
        }
        Command::Rank(mut a) => {
            a.fill(&config.rank);
            commands::rank(&ctx, &a)
        }
        Command::Report(mut a) => {
            a.fill(&config.report);
            commands::report(&ctx, &a)
        }
    }
}
