use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{Context, EvaluateArgs, GenerateArgs, RankArgs, ReportArgs, TestArgs};
use crate::bttest::{
    self, bootstrap_permutation, correlation_test, features_score, format_table, LowRankOptions, LrFeatures,
    LrTestOptions, TestReport,
};
use crate::data::{filter_min_games, ingest_csv, split_random, symmetrize, Dataset, GameRecord};
use crate::error::{Error, Result};
use crate::evaluation::{
    self, hindsight_bt, hindsight_elo2k, regret_decompose, select_hyperparams, selection_loss, write_traces_csv,
    Elo2kOptions, EvalTrace, RegretReport, ReplayOptions,
};
use crate::output::{config_hash, write_json, write_text, Provenance};
use crate::ranking::{bootstrap_ci, population_mle, win_rates, write_ranking_csv, MatchDistribution, Ranking};
use crate::raters::{default_rates, Algorithm, LearningRate, RaterSpec};
use crate::synthetic::{
    gen_bt_matrix, gen_sst, gen_wst, payoff_to_games, read_matrix_csv, read_payoff_csv, sample_outcomes,
    schedule_elo_window, schedule_uniform, MatrixKind, PayoffMode, StrengthPath, Variant, WinMatrix, WinProbability,
};

const DEFAULT_SEED: u64 = 0;

fn provenance<T: Serialize>(command: &str, args: &T, seed: u64) -> Result<Provenance> {
    let canonical = serde_json::to_string(&(command, args))?;
    Ok(Provenance::new(config_hash(&canonical), seed))
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::invalid(format!("missing --{flag}")))
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_dataset(path: &Path, prov: &Provenance, d: &Dataset) -> Result<()> {
    write_text(path, prov, |b| d.write_csv(b))
}

fn write_matrix(path: &Path, prov: &Provenance, m: &WinMatrix) -> Result<()> {
    write_text(path, prov, |b| m.write_csv(b))
}

fn read_win_matrix(path: &Path) -> Result<(WinMatrix, Vec<String>)> {
    let (rows, labels) = read_matrix_csv(std::fs::File::open(path)?)?;
    let n = rows.len();
    let m = WinMatrix::from_rows(&rows, MatrixKind::Custom)?;
    Ok((m, labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect())))
}

fn load_dataset(path: &Path, min_games: Option<usize>) -> Result<Dataset> {
    let d = ingest_csv(path)?;
    Ok(match min_games {
        Some(k) => filter_min_games(&d, k),
        None => d,
    })
}

/// Re-indexes `d` so that player `p` is row `p` of a matrix with `labels`.
fn align_to_labels(d: &Dataset, labels: &[String]) -> Result<Dataset> {
    let lookup: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();
    let map: Vec<usize> = d
        .player_names
        .iter()
        .map(|name| {
            lookup
                .get(name.as_str())
                .copied()
                .ok_or_else(|| Error::invalid(format!("player {name:?} is not a row of the truth matrix")))
        })
        .collect::<Result<_>>()?;
    Ok(Dataset {
        name: d.name.clone(),
        n_players: labels.len(),
        games: d
            .games
            .iter()
            .map(|g| GameRecord {
                i: map[g.i],
                j: map[g.j],
                ..*g
            })
            .collect(),
        player_names: labels.to_vec(),
    })
}

fn parse_model(model: &str) -> Result<Option<(bool, Variant)>> {
    if model == "bt" {
        return Ok(None);
    }
    let (class, variant) = model
        .split_once('-')
        .ok_or_else(|| Error::invalid(format!("unknown model {model:?}")))?;
    let sst = match class {
        "sst" => true,
        "wst" => false,
        _ => return Err(Error::invalid(format!("unknown model {model:?}"))),
    };
    Ok(Some((sst, variant.parse()?)))
}

pub fn generate(ctx: &Context, a: &GenerateArgs) -> Result<()> {
    let model = require(&a.model, "model")?.as_str();
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let prov = provenance("generate", a, seed)?;
    if model == "payoff" {
        let input = require(&a.input, "input")?;
        let m = read_payoff_csv(std::fs::File::open(input)?)?;
        let mode = match a.mode.as_deref().unwrap_or("expected") {
            "expected" => PayoffMode::Expected,
            "bernoulli" => PayoffMode::Bernoulli {
                copies: a.copies.unwrap_or(1),
            },
            other => return Err(Error::invalid(format!("unknown payoff mode {other:?}"))),
        };
        let name = a.name.clone().unwrap_or_else(|| {
            let stem = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match mode {
                PayoffMode::Expected => stem,
                PayoffMode::Bernoulli { copies } => format!("{stem}_bernoulli{copies}_s{seed}"),
            }
        });
        let d = payoff_to_games(&m, mode, seed, &name)?;
        let path = ctx.out.join(format!("{name}.games.csv"));
        write_dataset(&path, &prov, &d)?;
        println!("{} games, {} players -> {}", d.len(), d.n_players, path.display());
        return Ok(());
    }

    let n = *require(&a.n, "n")?;
    let t = *require(&a.t, "t")?;
    let start = match parse_model(model)? {
        None => gen_bt_matrix(n, seed)?.0,
        Some((true, v)) => gen_sst(n, v, seed)?,
        Some((false, v)) => gen_wst(n, v, seed)?,
    };
    let path_truth = match a.drift.as_deref() {
        None | Some("none") => None,
        Some("reversed") => Some(StrengthPath::new(start.clone(), start.reversed(), t)?),
        Some(other) => return Err(Error::invalid(format!("unknown drift {other:?}"))),
    };
    let truth: &dyn WinProbability = match &path_truth {
        Some(p) => p,
        None => &start,
    };
    let name = a.name.clone().unwrap_or_else(|| format!("{model}_n{n}_t{t}_s{seed}"));
    let d = match a.matchmaking.as_deref().unwrap_or("uniform") {
        "uniform" => sample_outcomes(truth, &schedule_uniform(n, t, seed)?, seed, &name)?,
        "elo-window" => {
            let k = a.window.unwrap_or((n / 5).max(2));
            schedule_elo_window(truth, t, k, seed, &name)?.1
        }
        other => return Err(Error::invalid(format!("unknown matchmaking {other:?}"))),
    };
    let games_path = ctx.out.join(format!("{name}.games.csv"));
    write_dataset(&games_path, &prov, &d)?;
    write_matrix(&ctx.out.join(format!("{name}.matrix.csv")), &prov, &start)?;
    if let Some(p) = &path_truth {
        write_matrix(&ctx.out.join(format!("{name}.matrix_end.csv")), &prov, &p.end)?;
    }
    println!("{} games, {} players -> {}", d.len(), n, games_path.display());
    Ok(())
}

fn rater_grid(a: &EvaluateArgs, n_players: usize) -> Result<Vec<RaterSpec>> {
    let algos: Vec<Algorithm> = if a.algos.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        a.algos.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    let rates: Vec<LearningRate> = if a.eta.is_empty() {
        default_rates(n_players)
    } else {
        a.eta.iter().map(|&eta| LearningRate::Constant { eta }).collect()
    };
    let ks = if a.k.is_empty() { vec![2, 4] } else { a.k.clone() };
    let mut grid = Vec::new();
    for alg in algos {
        match alg {
            Algorithm::Elo => grid.extend(rates.iter().map(|&rate| RaterSpec::Elo { rate })),
            Algorithm::Elo2k => {
                for &k in &ks {
                    grid.extend(rates.iter().map(|&rate| RaterSpec::Elo2k { k, rate }));
                }
            }
            other => grid.extend(RaterSpec::default_grid(other, n_players)),
        }
    }
    Ok(grid)
}

#[derive(Serialize)]
struct GridCell {
    params: String,
    status: String,
    selection_loss: Option<f64>,
    final_avg_loss: Option<f64>,
}

#[derive(Serialize)]
struct AlgorithmSummary {
    algorithm: String,
    selected: Option<String>,
    selection_loss: Option<f64>,
    final_avg_loss: Option<f64>,
    grid: Vec<GridCell>,
}

#[derive(Serialize)]
struct RegretFile {
    dataset: String,
    baselines: BTreeMap<String, f64>,
    reports: Vec<RegretReport>,
}

pub fn evaluate(ctx: &Context, a: &EvaluateArgs) -> Result<()> {
    let data_path = require(&a.data, "data")?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let prov = provenance("evaluate", a, seed)?;
    let mut d = load_dataset(data_path, a.min_games)?;
    let truth = match &a.truth {
        Some(p) => {
            let (m, labels) = read_win_matrix(p)?;
            d = align_to_labels(&d, &labels)?;
            Some(m)
        }
        None => None,
    };
    if a.symmetrize.unwrap_or(false) {
        d = symmetrize(&d, seed);
    }
    let grid = rater_grid(a, d.n_players)?;
    let opts = ReplayOptions {
        n_checkpoints: a.checkpoints.unwrap_or(evaluation::DEFAULT_CHECKPOINTS),
        times: None,
        truth: truth.as_ref(),
    };
    let results: Vec<Result<EvalTrace>> = grid
        .par_iter()
        .map(|spec| evaluation::replay(&d, spec, seed, opts))
        .collect();

    let traces_dir = ctx.out.join("traces");
    let mut summaries: Vec<AlgorithmSummary> = Vec::new();
    let mut selected: Vec<EvalTrace> = Vec::new();
    for alg in Algorithm::ALL {
        let cells: Vec<(RaterSpec, &Result<EvalTrace>)> = grid
            .iter()
            .zip(&results)
            .filter(|(s, _)| s.algorithm() == alg)
            .map(|(s, r)| (*s, r))
            .collect();
        if cells.is_empty() {
            continue;
        }
        let mut ok: Vec<(RaterSpec, EvalTrace)> = Vec::new();
        let mut table = Vec::new();
        for (spec, r) in &cells {
            match r {
                Ok(tr) => {
                    let file = traces_dir.join(format!("{}_{}.csv", alg.name(), sanitize(&spec.params_label())));
                    write_text(&file, &prov, |b| write_traces_csv(std::slice::from_ref(tr), b))?;
                    table.push(GridCell {
                        params: spec.params_label(),
                        status: "ok".into(),
                        selection_loss: Some(selection_loss(&tr.avg_losses())),
                        final_avg_loss: tr.final_checkpoint().map(|c| c.avg_loss),
                    });
                    ok.push((*spec, tr.clone()));
                }
                Err(e) => {
                    log::warn!("{} {}: {e}", alg.name(), spec.params_label());
                    table.push(GridCell {
                        params: spec.params_label(),
                        status: format!("error: {e}"),
                        selection_loss: None,
                        final_avg_loss: None,
                    });
                }
            }
        }
        let mut summary = AlgorithmSummary {
            algorithm: alg.name().into(),
            selected: None,
            selection_loss: None,
            final_avg_loss: None,
            grid: table,
        };
        if !ok.is_empty() {
            let best = select_hyperparams(&ok, d.n_players)?;
            let (spec, tr) = &ok[best];
            summary.selected = Some(spec.params_label());
            summary.selection_loss = Some(selection_loss(&tr.avg_losses()));
            summary.final_avg_loss = tr.final_checkpoint().map(|c| c.avg_loss);
            println!(
                "{:<10} selected {:<24} final avg loss {:.6}",
                alg.name(),
                spec.params_label(),
                summary.final_avg_loss.unwrap_or(f64::NAN)
            );
            selected.push(tr.clone());
        }
        summaries.push(summary);
    }
    write_json(
        &ctx.out.join("selection.json"),
        &prov,
        &serde_json::json!({ "dataset": d.name, "algorithms": summaries }),
    )?;

    if !a.baseline.is_empty() {
        let bt = hindsight_bt(&d, 0.0).or_else(|e| {
            log::warn!("unregularized hindsight fit failed ({e}); retrying with ridge 1e-6");
            hindsight_bt(&d, 1e-6)
        })?;
        let mut baselines = BTreeMap::new();
        for b in &a.baseline {
            let (label, loss) = if b == "bt" {
                ("bt".to_string(), bt.loss)
            } else if let Some(k) = b.strip_prefix("elo2k:") {
                let k: usize = k.parse().map_err(|_| Error::invalid(format!("bad baseline {b:?}")))?;
                let mut eo = Elo2kOptions::default();
                if let Some(r) = a.restarts {
                    eo.restarts = r;
                }
                if let Some(m) = a.max_iter {
                    eo.max_iter = m;
                }
                let h = hindsight_elo2k(&d, k, seed, Some(&bt.theta), eo)?;
                (format!("elo2k({k})"), h.loss)
            } else {
                return Err(Error::invalid(format!("unknown baseline {b:?}")));
            };
            baselines.insert(label, loss);
        }
        let reports = selected
            .iter()
            .flat_map(|tr| {
                baselines
                    .iter()
                    .map(move |(label, &loss)| regret_decompose(tr, loss, label))
            })
            .collect();
        write_json(
            &ctx.out.join("regret.json"),
            &prov,
            &RegretFile {
                dataset: d.name.clone(),
                baselines,
                reports,
            },
        )?;
    }
    Ok(())
}

fn parse_kind(k: &str) -> Result<&'static str> {
    Ok(match k {
        "lr-score" => "lr-score",
        "lr-lowrank" => "lr-lowrank",
        "lr-martingale" => "lr-martingale",
        "correlation" => "correlation",
        "bootstrap" | "bootstrap-permutation" => "bootstrap",
        other => return Err(Error::invalid(format!("unknown test kind {other:?}"))),
    })
}

pub fn test(ctx: &Context, a: &TestArgs) -> Result<()> {
    let data_path = require(&a.data, "data")?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let prov = provenance("test", a, seed)?;
    let d = load_dataset(data_path, a.min_games)?;
    let kinds: Vec<&str> = if a.kind.is_empty() {
        vec!["lr-score"]
    } else {
        a.kind.iter().map(|k| parse_kind(k)).collect::<Result<_>>()?
    };
    let etas = if a.eta.is_empty() {
        vec![0.01, 0.08]
    } else {
        a.eta.clone()
    };
    let correction = a.correction.unwrap_or(bttest::DEFAULT_CORRECTION);
    let sym = a.symmetrize.unwrap_or(true);
    let lambda_train = a.lambda_train.unwrap_or(bttest::SCORE_TRAIN_LAMBDA);
    let dir = ctx.out.join("tests");

    let lr = |features: LrFeatures| {
        bttest::lr_test(
            &d,
            LrTestOptions {
                features,
                correction,
                symmetrize: sym,
            },
            seed,
        )
    };
    let mut reports: Vec<TestReport> = Vec::new();
    for kind in kinds {
        let runs: Vec<(String, Result<TestReport>)> = match kind {
            "lr-score" => vec![("lr-score".into(), lr(LrFeatures::Score { lambda_train }))],
            "lr-lowrank" => vec![("lr-lowrank".into(), lr(LrFeatures::LowRank(LowRankOptions::default())))],
            "lr-martingale" => etas
                .iter()
                .map(|&eta| (format!("lr-martingale_eta{eta}"), lr(LrFeatures::Martingale { eta })))
                .collect(),
            "correlation" => {
                let run = || -> Result<TestReport> {
                    let data = if sym { symmetrize(&d, seed) } else { d.clone() };
                    let split = split_random(&data, seed)?;
                    let (_, theta) = features_score(&data, &split, lambda_train)?;
                    correlation_test(&data, &split, &theta)
                };
                vec![("correlation".into(), run())]
            }
            _ => etas
                .iter()
                .map(|&eta| {
                    let label = format!("bootstrap_eta{eta}");
                    let r = bootstrap_permutation(&d, eta, a.permutations.unwrap_or(100), seed).and_then(|pt| {
                        let sims = dir.join(format!("{label}.similarities.csv"));
                        write_text(&sims, &prov, |b| {
                            let mut w = csv::Writer::from_writer(b);
                            w.write_record(["replicate", "similarity"])?;
                            w.write_record(["original".to_string(), pt.original_similarity.to_string()])?;
                            for (k, s) in pt.permuted_similarities.iter().enumerate() {
                                w.write_record([k.to_string(), s.to_string()])?;
                            }
                            w.flush()?;
                            Ok(())
                        })?;
                        Ok(pt.report)
                    });
                    (label, r)
                })
                .collect(),
        };
        for (label, r) in runs {
            match r {
                Ok(rep) => {
                    write_json(&dir.join(format!("{label}.json")), &prov, &rep)?;
                    reports.push(rep);
                }
                Err(e) => log::warn!("test {label} skipped: {e}"),
            }
        }
    }
    let table = format_table(&reports);
    write_text(&dir.join("table.txt"), &prov, |b| {
        b.extend_from_slice(table.as_bytes());
        Ok(())
    })?;
    print!("{table}");
    Ok(())
}

fn resolve_pin(pin: Option<&str>, names: &[String]) -> Result<usize> {
    let n = names.len();
    match pin {
        None => n.checked_sub(1).ok_or_else(|| Error::invalid("no players")),
        Some(p) => names
            .iter()
            .position(|x| x == p)
            .or_else(|| p.parse::<usize>().ok().filter(|&k| k < n))
            .ok_or_else(|| Error::invalid(format!("unknown pinned player {p:?}"))),
    }
}

pub fn rank(ctx: &Context, a: &RankArgs) -> Result<()> {
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let prov = provenance("rank", a, seed)?;
    let tau = a.tau.unwrap_or(false);
    if tau && a.truth.is_none() {
        return Err(Error::invalid(
            "--tau needs a ground-truth matrix (--truth <matrix.csv>)",
        ));
    }
    if a.data.is_none() && a.p.is_none() {
        return Err(Error::invalid("rank needs --data or --p/--q"));
    }

    if let Some(p_path) = &a.p {
        let q_path = require(&a.q, "q")?;
        let (p, names) = read_win_matrix(p_path)?;
        let (q_rows, _) = read_matrix_csv(std::fs::File::open(q_path)?)?;
        let q = MatchDistribution::from_weights(q_rows)?;
        let pin = resolve_pin(a.pin.as_deref(), &names)?;
        let mle = population_mle(&p, &q, pin)?;
        let ranking = Ranking::from_scores(mle.theta.clone(), "population-mle");
        write_text(&ctx.out.join("ranking_population.csv"), &prov, |b| {
            write_ranking_csv(&ranking, &names, None, b)
        })?;
        let order: Vec<&str> = ranking.order.iter().map(|&k| names[k].as_str()).collect();
        println!("population MLE ranking: {}", order.join(" > "));
    }

    let Some(data_path) = &a.data else { return Ok(()) };
    let mut d = ingest_csv(data_path)?;
    let truth = match &a.truth {
        Some(t) => {
            let (m, labels) = read_win_matrix(t)?;
            d = align_to_labels(&d, &labels)?;
            Some(m)
        }
        None => None,
    };
    let names = d.player_names.clone();
    let wr = Ranking::from_scores(win_rates(&d)?, "winrate");
    write_text(&ctx.out.join("ranking_winrate.csv"), &prov, |b| {
        write_ranking_csv(&wr, &names, None, b)
    })?;

    let pin = resolve_pin(a.pin.as_deref(), &names)?;
    let fit = hindsight_bt(&d, 0.0)?;
    let shift = fit.theta[pin];
    let mle = Ranking::from_scores(fit.theta.iter().map(|x| x - shift).collect(), "mle");
    let intervals = match a.bootstrap {
        Some(b) => Some(bootstrap_ci(&d, b, (0.05, 0.95), pin, seed)?.intervals),
        None => None,
    };
    write_text(&ctx.out.join("ranking_mle.csv"), &prov, |b| {
        write_ranking_csv(&mle, &names, intervals.as_deref(), b)
    })?;
    let agree = wr.order == mle.order;
    write_json(
        &ctx.out.join("rank_summary.json"),
        &prov,
        &serde_json::json!({
            "dataset": d.name,
            "winrate_order": wr.order.iter().map(|&k| &names[k]).collect::<Vec<_>>(),
            "mle_order": mle.order.iter().map(|&k| &names[k]).collect::<Vec<_>>(),
            "orders_agree": agree,
        }),
    )?;
    println!("win-rate and MLE rankings {}", if agree { "agree" } else { "differ" });

    if tau {
        let truth = truth.expect("checked above");
        let spec = RaterSpec::Elo {
            rate: LearningRate::Constant {
                eta: a.eta.unwrap_or(0.06),
            },
        };
        let tr = evaluation::replay(
            &d,
            &spec,
            seed,
            ReplayOptions {
                n_checkpoints: a.checkpoints.unwrap_or(evaluation::DEFAULT_CHECKPOINTS),
                times: None,
                truth: Some(&truth),
            },
        )?;
        write_text(&ctx.out.join("tau_trace.csv"), &prov, |b| write_traces_csv(&[tr], b))?;
    }
    Ok(())
}

fn collect_json(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_json(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "json") {
            out.push(p);
        }
    }
    Ok(())
}

pub fn report(ctx: &Context, a: &ReportArgs) -> Result<()> {
    let dir = a.dir.clone().unwrap_or_else(|| ctx.out.clone());
    let mut files = Vec::new();
    collect_json(&dir, &mut files)?;
    let mut tests = Vec::new();
    let mut text = String::new();
    for f in &files {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(f)?)?;
        if v.get("test_kind").is_some() {
            tests.push(serde_json::from_value::<TestReport>(v)?);
        } else if let Some(reports) = v.get("reports").and_then(|r| r.as_array()) {
            text.push_str(&format!("regret ({})\n", f.display()));
            for r in reports {
                let r: RegretReport = serde_json::from_value(r.clone())?;
                text.push_str(&format!(
                    "  {:<10} {:<24} vs {:<9} loss/T {:.6}  hindsight/T {:.6}  regret/T {:.6}\n",
                    r.algorithm,
                    r.params,
                    r.model_class,
                    r.total_loss_per_step,
                    r.hindsight_loss_per_step,
                    r.regret_per_step
                ));
            }
        }
    }
    if !tests.is_empty() {
        text.push_str(&format_table(&tests));
    }
    let prov = Provenance::new(config_hash(&serde_json::to_string(&("report", a))?), 0);
    write_text(&dir.join("report.txt"), &prov, |b| {
        b.extend_from_slice(text.as_bytes());
        Ok(())
    })?;
    print!("{text}");
    Ok(())
}
