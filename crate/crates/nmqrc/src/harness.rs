//! Seed sweeps for the STM, NARMA and ESP experiments.
//!
//! Every `(regime, seed)` pair (and, for NARMA, every `τ`) is an
//! independent job. Jobs run on a rayon pool and results come back in job
//! order, so output files do not depend on scheduling.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nmqrc_core::esp::{backflow_count, dual_trajectory, window_stats, EspRecord, Register, WindowStats};
use nmqrc_core::hamiltonian::HamiltonianRealization;
use nmqrc_core::readout::{predict, squared_correlation, LeastSquares, Score};
use nmqrc_core::reservoir::{run_trajectory, FeatureMatrix};
use nmqrc_core::stats::aggregate;
use nmqrc_core::tasks::{gen_uniform_inputs, narma_series, scale_inputs, stm_targets, NarmaConstants, NARMA_INPUT_MAX};
use nmqrc_core::DensityMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{input_seed, ConfigError, ExperimentConfig, Regime, Task};
use crate::formats::{self, CouplingsDoc, EspSummaryRow, FormatError, NarmaSummaryRow, StmSummaryRow};

/// A numerical failure inside one job.
#[derive(Debug, thiserror::Error)]
#[error("{task} regime `{regime}` seed {seed}{}: {source}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
pub struct RunError {
    pub task: &'static str,
    pub regime: String,
    pub seed: u64,
    pub context: Option<String>,
    #[source]
    pub source: Box<nmqrc_core::Error>,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Scores of one sweep point across seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    /// Delay `τ_d` for STM, order `n` for NARMA.
    pub axis: usize,
    pub tau: f64,
    pub regime: String,
    pub seeds: Vec<u64>,
    pub scores: Vec<f64>,
    /// Seeds whose prediction or target had zero variance (scored 0).
    pub degenerate: usize,
    pub mean: f64,
    pub std: f64,
}

/// Per-seed ESP outcome.
#[derive(Clone, Debug)]
pub struct EspSeedResult {
    pub regime: String,
    pub seed: u64,
    pub records: Vec<EspRecord>,
    pub window: WindowStats,
    pub backflow_count_sys: usize,
    pub backflow_total_sys: f64,
}

#[derive(Clone, Debug)]
pub struct SweepRun {
    pub results: Vec<SweepResult>,
    pub couplings: Vec<(String, u64, CouplingsDoc)>,
}

#[derive(Clone, Debug)]
pub struct EspRun {
    pub seeds: Vec<EspSeedResult>,
    pub couplings: Vec<(String, u64, CouplingsDoc)>,
}

fn in_pool<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match cfg.threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        None => Ok(f()),
    }
}

fn require(cfg: &ExperimentConfig, task: Task) -> Result<(), HarnessError> {
    if cfg.task != task {
        return Err(ConfigError::Invalid {
            field: "task".into(),
            reason: format!("expected {}, found {}", task.name(), cfg.task.name()),
        }
        .into());
    }
    cfg.validate()?;
    Ok(())
}

struct JobCtx<'a> {
    task: &'static str,
    regime: &'a Regime,
    seed: u64,
}

impl JobCtx<'_> {
    fn err(&self, context: Option<String>) -> impl FnOnce(nmqrc_core::Error) -> RunError + '_ {
        move |source| RunError {
            task: self.task,
            regime: self.regime.label.clone(),
            seed: self.seed,
            context,
            source: Box::new(source),
        }
    }
}

/// One trajectory per job, shared by every target fitted on it.
struct Trajectory {
    real: HamiltonianRealization,
    features: FeatureMatrix,
}

fn simulate(cfg: &ExperimentConfig, ctx: &JobCtx, tau: f64, inputs: &[f64]) -> Result<Trajectory, RunError> {
    let params = cfg.reservoir_params(ctx.regime, ctx.seed);
    let real = HamiltonianRealization::sample(&params).map_err(ctx.err(None))?;
    let initial = DensityMatrix::zero_state(params.qubits()).map_err(ctx.err(None))?;
    let (features, _) = run_trajectory(&real, inputs, &cfg.reservoir_config(tau), &initial).map_err(ctx.err(None))?;
    Ok(Trajectory { real, features })
}

/// Fits every target on the train rows and scores it on the validation rows.
fn score_targets(
    cfg: &ExperimentConfig,
    features: &FeatureMatrix,
    targets: impl Iterator<Item = nmqrc_core::Result<Vec<f64>>>,
) -> nmqrc_core::Result<Vec<Score>> {
    let split = cfg.split;
    let train_x = features.rows(split.train_range())?;
    let val_x = features.rows(split.val_range())?;
    let ls = LeastSquares::with_ridge(&train_x, cfg.ridge_lambda)?;
    targets
        .map(|y| {
            let y = y?;
            let w = ls.solve(&y[split.train_range()])?;
            let yhat = predict(&val_x, &w)?;
            squared_correlation(&y[split.val_range()], &yhat)
        })
        .collect()
}

struct JobScores {
    regime: String,
    tau: f64,
    seed: u64,
    /// `(axis, score)` pairs.
    scores: Vec<(usize, Score)>,
    couplings: Option<CouplingsDoc>,
}

fn collect_sweep(cfg: &ExperimentConfig, jobs: Vec<JobScores>) -> Result<SweepRun, HarnessError> {
    let mut results: Vec<SweepResult> = Vec::new();
    let mut couplings = Vec::new();
    for job in jobs {
        if let Some(doc) = job.couplings {
            couplings.push((job.regime.clone(), job.seed, doc));
        }
        for (axis, score) in job.scores {
            let slot = results
                .iter_mut()
                .find(|r| r.axis == axis && r.tau == job.tau && r.regime == job.regime);
            let slot = match slot {
                Some(s) => s,
                None => {
                    results.push(SweepResult {
                        axis,
                        tau: job.tau,
                        regime: job.regime.clone(),
                        seeds: Vec::new(),
                        scores: Vec::new(),
                        degenerate: 0,
                        mean: 0.0,
                        std: 0.0,
                    });
                    results.last_mut().expect("just pushed")
                }
            };
            slot.seeds.push(job.seed);
            slot.scores.push(score.value);
            slot.degenerate += usize::from(score.degenerate);
        }
    }
    for r in &mut results {
        let mut order: Vec<usize> = (0..r.seeds.len()).collect();
        order.sort_by_key(|&i| r.seeds[i]);
        r.seeds = order.iter().map(|&i| r.seeds[i]).collect();
        r.scores = order.iter().map(|&i| r.scores[i]).collect();
        let (mean, std) = aggregate(&r.scores).map_err(|source| RunError {
            task: cfg.task.name(),
            regime: r.regime.clone(),
            seed: r.seeds[0],
            context: Some(format!("aggregating axis {}", r.axis)),
            source: Box::new(source),
        })?;
        r.mean = mean;
        r.std = std;
    }
    results.sort_by(|a, b| {
        let ra = cfg.run_regimes().iter().position(|g| g.label == a.regime);
        let rb = cfg.run_regimes().iter().position(|g| g.label == b.regime);
        ra.cmp(&rb).then(a.tau.total_cmp(&b.tau)).then(a.axis.cmp(&b.axis))
    });
    Ok(SweepRun { results, couplings })
}

/// Delayed-recall capacity for `τ_d = 0..=tau_d_max`.
pub fn run_stm(cfg: &ExperimentConfig) -> Result<SweepRun, HarnessError> {
    require(cfg, Task::Stm)?;
    let regimes = cfg.run_regimes();
    let jobs: Vec<(&Regime, u64)> = regimes
        .iter()
        .flat_map(|r| cfg.seeds.iter().map(move |&s| (r, s)))
        .collect();
    let tau = cfg.taus[0];
    let outcomes = in_pool(cfg, || {
        jobs.par_iter()
            .map(|&(regime, seed)| -> Result<JobScores, RunError> {
                let ctx = JobCtx {
                    task: "stm",
                    regime,
                    seed,
                };
                let s = gen_uniform_inputs(cfg.split.total(), 0.0, 1.0, input_seed(seed)).map_err(ctx.err(None))?;
                let traj = simulate(cfg, &ctx, tau, &s)?;
                let targets = (0..=cfg.tau_d_max).map(|d| stm_targets(&s, d, cfg.split.washout));
                let scores = score_targets(cfg, &traj.features, targets).map_err(ctx.err(None))?;
                Ok(JobScores {
                    regime: regime.label.clone(),
                    tau,
                    seed,
                    scores: scores.into_iter().enumerate().collect(),
                    couplings: Some(CouplingsDoc::from_realization(&traj.real)),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    collect_sweep(cfg, outcomes)
}

/// NARMA-`n` validation scores for every order, `τ` and regime.
pub fn run_narma(cfg: &ExperimentConfig) -> Result<SweepRun, HarnessError> {
    require(cfg, Task::Narma)?;
    let regimes = cfg.run_regimes();
    let mut jobs: Vec<(&Regime, f64, u64)> = Vec::new();
    for r in &regimes {
        for &tau in &cfg.taus {
            jobs.extend(cfg.seeds.iter().map(|&s| (r, tau, s)));
        }
    }
    let outcomes = in_pool(cfg, || {
        jobs.par_iter()
            .enumerate()
            .map(|(idx, &(regime, tau, seed))| -> Result<JobScores, RunError> {
                let ctx = JobCtx {
                    task: "narma",
                    regime,
                    seed,
                };
                let u = gen_uniform_inputs(cfg.split.total(), 0.0, NARMA_INPUT_MAX, input_seed(seed))
                    .map_err(ctx.err(None))?;
                let s = scale_inputs(&u, NARMA_INPUT_MAX).map_err(ctx.err(None))?;
                let mut ys = Vec::with_capacity(cfg.orders.len());
                for &n in &cfg.orders {
                    let y =
                        narma_series(&u, n, NarmaConstants::default()).map_err(ctx.err(Some(format!("order {n}"))))?;
                    ys.push(y);
                }
                let traj = simulate(cfg, &ctx, tau, &s)?;
                let scores = score_targets(cfg, &traj.features, ys.into_iter().map(Ok))
                    .map_err(ctx.err(Some(format!("tau {tau}"))))?;
                // Couplings do not depend on τ; keep one copy per seed.
                let first_tau = jobs[..idx]
                    .iter()
                    .all(|&(r, _, s)| r.label != regime.label || s != seed);
                Ok(JobScores {
                    regime: regime.label.clone(),
                    tau,
                    seed,
                    scores: cfg.orders.iter().copied().zip(scores).collect(),
                    couplings: first_tau.then(|| CouplingsDoc::from_realization(&traj.real)),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    collect_sweep(cfg, outcomes)
}

/// Dual-trajectory echo-state diagnostics per regime and seed.
pub fn run_esp(cfg: &ExperimentConfig) -> Result<EspRun, HarnessError> {
    require(cfg, Task::Esp)?;
    let regimes = cfg.run_regimes();
    let jobs: Vec<(&Regime, u64)> = regimes
        .iter()
        .flat_map(|r| cfg.seeds.iter().map(move |&s| (r, s)))
        .collect();
    let tau = cfg.taus[0];
    let outcomes = in_pool(cfg, || {
        jobs.par_iter()
            .map(|&(regime, seed)| -> Result<(EspSeedResult, CouplingsDoc), RunError> {
                let ctx = JobCtx {
                    task: "esp",
                    regime,
                    seed,
                };
                let params = cfg.reservoir_params(regime, seed);
                let real = HamiltonianRealization::sample(&params).map_err(ctx.err(None))?;
                let inputs = gen_uniform_inputs(cfg.steps, 0.0, 1.0, input_seed(seed)).map_err(ctx.err(None))?;
                let records = dual_trajectory(&real, &inputs, &cfg.reservoir_config(tau)).map_err(ctx.err(None))?;
                let window = window_stats(&records, cfg.window_from, cfg.window_to).map_err(ctx.err(None))?;
                let (count, total) = backflow_count(&records, Register::Sys, cfg.backflow_tol);
                Ok((
                    EspSeedResult {
                        regime: regime.label.clone(),
                        seed,
                        records,
                        window,
                        backflow_count_sys: count,
                        backflow_total_sys: total,
                    },
                    CouplingsDoc::from_realization(&real),
                ))
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    let mut seeds = Vec::with_capacity(outcomes.len());
    let mut couplings = Vec::with_capacity(outcomes.len());
    for (res, doc) in outcomes {
        couplings.push((res.regime.clone(), res.seed, doc));
        seeds.push(res);
    }
    Ok(EspRun { seeds, couplings })
}

/// Run description written next to the results.
#[derive(Serialize)]
struct RunMetadata<'a> {
    tool_version: &'static str,
    config: &'a ExperimentConfig,
    input_streams: String,
    initial_state: &'static str,
}

fn metadata(cfg: &ExperimentConfig) -> RunMetadata<'_> {
    RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        input_streams: format!(
            "shared across regimes: seed n drives inputs generated from stream seed n XOR {:#x}",
            input_seed(0)
        ),
        initial_state: match cfg.task {
            Task::Esp => "I/2^N and |0...0><0...0|",
            _ => "|0...0><0...0|",
        },
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Output {
            path: dir.to_path_buf(),
            source: e.into(),
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::Output {
            path: path.to_path_buf(),
            source: e.into(),
        })
}

fn write_with(
    path: PathBuf,
    f: impl FnOnce(BufWriter<File>) -> Result<(), FormatError>,
) -> Result<PathBuf, HarnessError> {
    let out = create(&path)?;
    f(out).map_err(|source| HarnessError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn write_common(
    cfg: &ExperimentConfig,
    couplings: &[(String, u64, CouplingsDoc)],
) -> Result<Vec<PathBuf>, HarnessError> {
    let root = cfg.output_dir.join(cfg.task.name());
    let mut written = vec![write_with(root.join("run.json"), |w| {
        serde_json::to_writer_pretty(w, &metadata(cfg)).map_err(FormatError::from)
    })?];
    for (regime, seed, doc) in couplings {
        let path = root.join(regime).join(format!("couplings_seed{seed}.json"));
        written.push(write_with(path, |w| {
            serde_json::to_writer_pretty(w, doc).map_err(FormatError::from)
        })?);
    }
    Ok(written)
}

#[derive(Serialize)]
struct SeedScoreRow<'a> {
    axis: usize,
    tau: f64,
    regime: &'a str,
    seed: u64,
    score: f64,
}

fn write_seed_scores(path: PathBuf, results: &[&SweepResult]) -> Result<PathBuf, HarnessError> {
    let rows: Vec<SeedScoreRow> = results
        .iter()
        .flat_map(|r| {
            r.seeds.iter().zip(&r.scores).map(|(&seed, &score)| SeedScoreRow {
                axis: r.axis,
                tau: r.tau,
                regime: &r.regime,
                seed,
                score,
            })
        })
        .collect();
    write_with(path, |w| formats::write_rows(w, &rows))
}

/// Writes `<out>/<task>/<regime>/summary.csv`, per-seed scores, couplings
/// and run metadata. Returns the written paths.
pub fn write_sweep(cfg: &ExperimentConfig, run: &SweepRun) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = write_common(cfg, &run.couplings)?;
    let root = cfg.output_dir.join(cfg.task.name());
    for regime in cfg.run_regimes() {
        let mine: Vec<&SweepResult> = run.results.iter().filter(|r| r.regime == regime.label).collect();
        let dir = root.join(&regime.label);
        let summary = dir.join("summary.csv");
        written.push(match cfg.task {
            Task::Stm => {
                let rows: Vec<StmSummaryRow> = mine
                    .iter()
                    .map(|r| StmSummaryRow {
                        tau_d: r.axis,
                        regime: r.regime.clone(),
                        mean_cstm: r.mean,
                        std_cstm: r.std,
                        n_seeds: r.scores.len(),
                    })
                    .collect();
                write_with(summary, |w| formats::write_rows(w, &rows))?
            }
            Task::Narma => {
                let rows: Vec<NarmaSummaryRow> = mine
                    .iter()
                    .map(|r| NarmaSummaryRow {
                        order: r.axis,
                        tau: r.tau,
                        regime: r.regime.clone(),
                        mean_r2: r.mean,
                        std_r2: r.std,
                        n_seeds: r.scores.len(),
                    })
                    .collect();
                write_with(summary, |w| formats::write_rows(w, &rows))?
            }
            Task::Esp => unreachable!("ESP runs are written by write_esp"),
        });
        written.push(write_seed_scores(dir.join("scores.csv"), &mine)?);
    }
    Ok(written)
}

/// Writes per-seed record streams, the per-regime window summary,
/// couplings and run metadata.
pub fn write_esp(cfg: &ExperimentConfig, run: &EspRun) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = write_common(cfg, &run.couplings)?;
    let root = cfg.output_dir.join(cfg.task.name());
    for regime in cfg.run_regimes() {
        let dir = root.join(&regime.label);
        let mine: Vec<&EspSeedResult> = run.seeds.iter().filter(|s| s.regime == regime.label).collect();
        for s in &mine {
            written.push(write_with(dir.join(format!("esp_seed{}.csv", s.seed)), |w| {
                formats::write_esp_csv(w, &s.records)
            })?);
        }
        let rows: Vec<EspSummaryRow> = mine
            .iter()
            .map(|s| EspSummaryRow {
                seed: s.seed,
                regime: s.regime.clone(),
                window_mean_sqnorm: s.window.mean_sqnorm,
                window_max_sqnorm: s.window.max_sqnorm,
                backflow_count_sys: s.backflow_count_sys,
            })
            .collect();
        written.push(write_with(dir.join("summary.csv"), |w| formats::write_rows(w, &rows))?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn tiny(task: Task, extra: &str) -> ExperimentConfig {
        let text = format!(
            "schema_version = 1\nn_sys = 2\nn_env = 1\nv = 3\nseeds = [0, 1]\n{}{extra}",
            if task == Task::Esp {
                "steps = 40\nwindow_from = 20\nwindow_to = 40\n"
            } else {
                "washout = 10\ntrain = 40\nval = 15\n"
            }
        );
        ExperimentConfig::from_toml_str(&text, task).unwrap()
    }

    #[test]
    fn stm_sweep_shape() {
        let cfg = tiny(Task::Stm, "tau_d_max = 4\nregimes = [\"markov\", \"non_markov\"]\n");
        let run = run_stm(&cfg).unwrap();
        assert_eq!(run.results.len(), 2 * 5);
        assert_eq!(run.couplings.len(), 4);
        for r in &run.results {
            assert_eq!(r.seeds, vec![0, 1]);
            assert!(r.scores.iter().all(|s| (0.0..=1.0).contains(s)));
        }
        assert_eq!(run.results[0].regime, "markov");
        assert_eq!(run.results[0].axis, 0);
        assert!(run.results[0].mean > 0.5, "delay 0 mean {}", run.results[0].mean);
    }

    #[test]
    fn narma_sweep_with_baseline() {
        let cfg = tiny(
            Task::Narma,
            "taus = [0.5, 1.0]\norders = [1, 5]\nregimes = [\"intermediate\"]\nfn_baseline = true\n",
        );
        let run = run_narma(&cfg).unwrap();
        assert_eq!(run.results.len(), 2 * 2 * 2);
        assert_eq!(run.couplings.len(), 2 * 2);
        let fn_rows: Vec<_> = run.results.iter().filter(|r| r.regime == "fn").collect();
        assert_eq!(fn_rows.len(), 4);
        assert_eq!(run.couplings.iter().filter(|c| c.0 == "fn").count(), 2);
        assert!(run
            .couplings
            .iter()
            .filter(|c| c.0 == "fn")
            .all(|c| c.2.params.n_env == 0));
    }

    #[test]
    fn esp_records_cover_all_steps() {
        let cfg = tiny(Task::Esp, "regimes = [\"markov\"]\n");
        let run = run_esp(&cfg).unwrap();
        assert_eq!(run.seeds.len(), 2);
        assert!(run.seeds.iter().all(|s| s.records.len() == 40));
    }

    #[test]
    fn wrong_task_is_a_config_error() {
        let cfg = tiny(Task::Stm, "tau_d_max = 4\n");
        assert!(matches!(run_esp(&cfg), Err(HarnessError::Config(_))));
    }
}
