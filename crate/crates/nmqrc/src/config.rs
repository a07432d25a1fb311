//! Experiment configuration files.
//!
//! A config is a flat TOML document. Every key except `schema_version` is
//! optional and falls back to a task-specific default; unknown keys are
//! rejected so that a misspelled parameter cannot silently change a run.

use std::fs;
use std::path::{Path, PathBuf};

use nmqrc_core::hamiltonian::ReservoirParams;
use nmqrc_core::linalg::MAX_QUBITS;
use nmqrc_core::reservoir::{Multiplex, ObservableKind, ReservoirConfig};
use nmqrc_core::tasks::SplitSpec;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Name of the offending key, when the error concerns one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Stm,
    Narma,
    Esp,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Stm => "stm",
            Task::Narma => "narma",
            Task::Esp => "esp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    /// Small sizes for smoke runs and CI.
    Quick,
    /// Sizes of the published experiments.
    Paper,
}

/// A coupling regime: `J_env ~ U(-αJ0, αJ0)`, `g ~ U(-βJ0, βJ0)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regime {
    pub label: String,
    pub alpha: f64,
    pub beta: f64,
    pub n_env: usize,
}

/// Preset `(label, α, β)` triples for a task.
pub fn presets(task: Task) -> [(&'static str, f64, f64); 3] {
    match task {
        Task::Stm | Task::Esp => [
            ("markov", 10.0, 0.01),
            ("non_markov", 0.01, 10.0),
            ("intermediate", 1.0, 1.0),
        ],
        Task::Narma => [
            ("markov", 5.0, 0.1),
            ("non_markov", 0.1, 5.0),
            ("intermediate", 1.0, 1.0),
        ],
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    task: Option<Task>,
    n_sys: Option<usize>,
    n_env: Option<usize>,
    j0: Option<f64>,
    h_sys: Option<f64>,
    h_env: Option<f64>,
    regimes: Option<Vec<String>>,
    alpha: Option<f64>,
    beta: Option<f64>,
    tau: Option<f64>,
    taus: Option<Vec<f64>>,
    v: Option<usize>,
    observables: Option<ObservableKind>,
    multiplex: Option<Multiplex>,
    input_qubit: Option<usize>,
    washout: Option<usize>,
    train: Option<usize>,
    val: Option<usize>,
    seeds: Option<Vec<u64>>,
    ridge_lambda: Option<f64>,
    tau_d_max: Option<usize>,
    orders: Option<Vec<usize>>,
    fn_baseline: Option<bool>,
    steps: Option<usize>,
    window_from: Option<usize>,
    window_to: Option<usize>,
    backflow_tol: Option<f64>,
    output_dir: Option<PathBuf>,
    threads: Option<usize>,
}

/// Fully resolved experiment settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub n_sys: usize,
    pub n_env: usize,
    pub j0: f64,
    pub h_sys: f64,
    /// Environment field; `None` ties it to `αJ0` of each regime.
    pub h_env: Option<f64>,
    pub regimes: Vec<Regime>,
    /// Evolution times per input; STM and ESP use exactly one.
    pub taus: Vec<f64>,
    pub v: usize,
    pub observables: ObservableKind,
    pub multiplex: Multiplex,
    pub input_qubit: usize,
    pub split: SplitSpec,
    pub seeds: Vec<u64>,
    pub ridge_lambda: f64,
    pub tau_d_max: usize,
    pub orders: Vec<usize>,
    pub fn_baseline: bool,
    pub steps: usize,
    pub window_from: usize,
    pub window_to: usize,
    pub backflow_tol: f64,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for `task` at the published experiment sizes.
    pub fn defaults(task: Task) -> Self {
        Self::resolve(
            RawConfig {
                schema_version: SCHEMA_VERSION,
                ..RawConfig::default()
            },
            task,
        )
        .expect("defaults are valid")
    }

    pub fn load(path: &Path, task: Task) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, task)
    }

    /// Parses a config for `task`. A `task` key in the document must agree.
    pub fn from_toml_str(text: &str, task: Task) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        Self::resolve(raw, task)
    }

    fn resolve(raw: RawConfig, task: Task) -> Result<Self, ConfigError> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", raw.schema_version),
            ));
        }
        if let Some(t) = raw.task {
            if t != task {
                return Err(ConfigError::invalid(
                    "task",
                    format!("config is for `{}` but `{}` was requested", t.name(), task.name()),
                ));
            }
        }
        let only = |present: bool, field: &str, allowed: Task| -> Result<(), ConfigError> {
            if present && task != allowed {
                return Err(ConfigError::invalid(
                    field,
                    format!("only valid for task {}", allowed.name()),
                ));
            }
            Ok(())
        };
        only(raw.tau_d_max.is_some(), "tau_d_max", Task::Stm)?;
        only(raw.orders.is_some(), "orders", Task::Narma)?;
        only(raw.fn_baseline.is_some(), "fn_baseline", Task::Narma)?;
        only(raw.taus.is_some(), "taus", Task::Narma)?;
        for (present, field) in [
            (raw.steps.is_some(), "steps"),
            (raw.window_from.is_some(), "window_from"),
            (raw.window_to.is_some(), "window_to"),
            (raw.backflow_tol.is_some(), "backflow_tol"),
        ] {
            only(present, field, Task::Esp)?;
        }
        if task == Task::Esp {
            for (present, field) in [
                (raw.washout.is_some(), "washout"),
                (raw.train.is_some(), "train"),
                (raw.val.is_some(), "val"),
                (raw.ridge_lambda.is_some(), "ridge_lambda"),
                (raw.observables.is_some(), "observables"),
            ] {
                if present {
                    return Err(ConfigError::invalid(field, "not used by task esp"));
                }
            }
        }

        let j0 = raw.j0.unwrap_or(1.0);
        let n_env = raw.n_env.unwrap_or(3);
        let regimes = match (raw.alpha, raw.beta, raw.regimes) {
            (None, None, names) => {
                let names = names.unwrap_or_else(|| presets(task).iter().map(|p| p.0.to_string()).collect());
                if names.is_empty() {
                    return Err(ConfigError::invalid("regimes", "at least one regime is required"));
                }
                let mut out: Vec<Regime> = Vec::with_capacity(names.len());
                for name in names {
                    let Some(&(label, alpha, beta)) = presets(task).iter().find(|p| p.0 == name) else {
                        return Err(ConfigError::invalid(
                            "regimes",
                            format!("unknown regime `{name}` (expected markov, non_markov or intermediate)"),
                        ));
                    };
                    if out.iter().any(|r| r.label == label) {
                        return Err(ConfigError::invalid("regimes", format!("`{name}` listed twice")));
                    }
                    out.push(Regime {
                        label: label.to_string(),
                        alpha,
                        beta,
                        n_env,
                    });
                }
                out
            }
            (Some(alpha), Some(beta), None) => vec![Regime {
                label: "custom".to_string(),
                alpha,
                beta,
                n_env,
            }],
            (Some(_), Some(_), Some(_)) => {
                return Err(ConfigError::invalid(
                    "regimes",
                    "cannot be combined with explicit alpha and beta",
                ))
            }
            (Some(_), None, _) => return Err(ConfigError::invalid("beta", "required when alpha is set")),
            (None, Some(_), _) => return Err(ConfigError::invalid("alpha", "required when beta is set")),
        };

        let taus = match (raw.tau, raw.taus) {
            (Some(_), Some(_)) => return Err(ConfigError::invalid("taus", "give either tau or taus")),
            (Some(t), None) => vec![t],
            (None, Some(ts)) => ts,
            (None, None) if task == Task::Narma => vec![0.5, 1.0, 5.0],
            (None, None) => vec![0.5],
        };

        let cfg = Self {
            task,
            n_sys: raw.n_sys.unwrap_or(4),
            n_env,
            j0,
            h_sys: raw.h_sys.unwrap_or(if task == Task::Narma { j0 } else { j0 / 2.0 }),
            h_env: raw.h_env,
            regimes,
            taus,
            v: raw.v.unwrap_or(if task == Task::Narma { 20 } else { 50 }),
            observables: raw.observables.unwrap_or(if task == Task::Narma {
                ObservableKind::ZAndZz
            } else {
                ObservableKind::ZOnly
            }),
            multiplex: raw.multiplex.unwrap_or_default(),
            input_qubit: raw.input_qubit.unwrap_or(0),
            split: SplitSpec {
                washout: raw.washout.unwrap_or(1000),
                train: raw.train.unwrap_or(3000),
                val: raw.val.unwrap_or(1000),
            },
            seeds: raw.seeds.unwrap_or_else(|| (0..10).collect()),
            ridge_lambda: raw.ridge_lambda.unwrap_or(0.0),
            tau_d_max: raw.tau_d_max.unwrap_or(30),
            orders: raw.orders.unwrap_or_else(|| vec![1, 5, 10, 20, 30, 40, 50]),
            fn_baseline: raw.fn_baseline.unwrap_or(false),
            steps: raw.steps.unwrap_or(2500),
            window_from: raw.window_from.unwrap_or(1500),
            window_to: raw.window_to.unwrap_or(2500),
            backflow_tol: raw.backflow_tol.unwrap_or(1e-6),
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("results")),
            threads: raw.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides sizes with a preset scale.
    pub fn apply_scale(&mut self, scale: Scale) {
        match scale {
            Scale::Quick => {
                self.v = 10;
                self.split = SplitSpec {
                    washout: 200,
                    train: 600,
                    val: 200,
                };
                self.seeds.truncate(3);
                self.steps = 1000;
                self.window_from = 600;
                self.window_to = 1000;
                self.tau_d_max = self.tau_d_max.min(self.split.washout);
            }
            Scale::Paper => {
                self.v = if self.task == Task::Narma { 20 } else { 50 };
                self.split = SplitSpec {
                    washout: 1000,
                    train: 3000,
                    val: 1000,
                };
                self.seeds = (0..10).collect();
                self.steps = 2500;
                self.window_from = 1500;
                self.window_to = 2500;
            }
        }
    }

    /// Replaces the seed list by `0..count`.
    pub fn set_seed_count(&mut self, count: usize) {
        self.seeds = (0..count as u64).collect();
    }

    /// Checks every setting against the preconditions of the simulation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_sys == 0 {
            return Err(ConfigError::invalid("n_sys", "at least one system qubit is required"));
        }
        if self.n_sys + self.n_env > MAX_QUBITS {
            return Err(ConfigError::invalid(
                "n_env",
                format!(
                    "n_sys + n_env = {} exceeds {MAX_QUBITS} qubits",
                    self.n_sys + self.n_env
                ),
            ));
        }
        if !(self.j0.is_finite() && self.j0 > 0.0) {
            return Err(ConfigError::invalid("j0", "must be finite and positive"));
        }
        if !self.h_sys.is_finite() {
            return Err(ConfigError::invalid("h_sys", "must be finite"));
        }
        if self.h_env.is_some_and(|h| !h.is_finite()) {
            return Err(ConfigError::invalid("h_env", "must be finite"));
        }
        for r in &self.regimes {
            if !(r.alpha.is_finite() && r.alpha >= 0.0) {
                return Err(ConfigError::invalid("alpha", "must be finite and non-negative"));
            }
            if !(r.beta.is_finite() && r.beta >= 0.0) {
                return Err(ConfigError::invalid("beta", "must be finite and non-negative"));
            }
        }
        let tau_field = if self.task == Task::Narma { "taus" } else { "tau" };
        if self.taus.is_empty() {
            return Err(ConfigError::invalid(tau_field, "at least one value is required"));
        }
        if self.task != Task::Narma && self.taus.len() != 1 {
            return Err(ConfigError::invalid(tau_field, "exactly one value is required"));
        }
        if self.taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(ConfigError::invalid(tau_field, "must be finite and positive"));
        }
        if self.v == 0 {
            return Err(ConfigError::invalid("v", "at least one virtual node is required"));
        }
        if self.input_qubit >= self.n_sys {
            return Err(ConfigError::invalid("input_qubit", "must index a system qubit"));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::invalid("seeds", "at least one seed is required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::invalid("seeds", "seeds must be distinct"));
        }
        if self.threads == Some(0) {
            return Err(ConfigError::invalid("threads", "must be at least 1"));
        }
        match self.task {
            Task::Stm | Task::Narma => {
                if self.split.train == 0 {
                    return Err(ConfigError::invalid("train", "must be at least 1"));
                }
                if self.split.val == 0 {
                    return Err(ConfigError::invalid("val", "must be at least 1"));
                }
                if !(self.ridge_lambda.is_finite() && self.ridge_lambda >= 0.0) {
                    return Err(ConfigError::invalid("ridge_lambda", "must be finite and non-negative"));
                }
            }
            Task::Esp => {}
        }
        match self.task {
            Task::Stm => {
                if self.tau_d_max > self.split.washout {
                    return Err(ConfigError::invalid(
                        "tau_d_max",
                        format!(
                            "delay {} exceeds the washout of {} steps",
                            self.tau_d_max, self.split.washout
                        ),
                    ));
                }
            }
            Task::Narma => {
                if self.orders.is_empty() {
                    return Err(ConfigError::invalid("orders", "at least one order is required"));
                }
                if self.orders.contains(&0) {
                    return Err(ConfigError::invalid("orders", "orders must be at least 1"));
                }
            }
            Task::Esp => {
                if self.steps == 0 {
                    return Err(ConfigError::invalid("steps", "must be at least 1"));
                }
                if self.window_from >= self.window_to {
                    return Err(ConfigError::invalid(
                        "window_from",
                        "window must satisfy window_from < window_to",
                    ));
                }
                if self.window_to > self.steps {
                    return Err(ConfigError::invalid(
                        "window_to",
                        format!("window ends after step {}", self.steps),
                    ));
                }
                if !(self.backflow_tol.is_finite() && self.backflow_tol >= 0.0) {
                    return Err(ConfigError::invalid("backflow_tol", "must be finite and non-negative"));
                }
            }
        }
        Ok(())
    }

    /// Regimes actually run, including the environment-free baseline when
    /// requested.
    pub fn run_regimes(&self) -> Vec<Regime> {
        let mut out = self.regimes.clone();
        if self.fn_baseline {
            out.push(Regime {
                label: "fn".to_string(),
                alpha: 0.0,
                beta: 0.0,
                n_env: 0,
            });
        }
        out
    }

    pub fn reservoir_params(&self, regime: &Regime, seed: u64) -> ReservoirParams {
        let mut p = ReservoirParams::new(self.n_sys, regime.n_env)
            .with_regime(regime.alpha, regime.beta)
            .with_h_sys(self.h_sys)
            .with_seed(seed);
        p.j0 = self.j0;
        p.h_env = self.h_env.unwrap_or(regime.alpha * self.j0);
        p
    }

    pub fn reservoir_config(&self, tau: f64) -> ReservoirConfig {
        let mut cfg = ReservoirConfig::new(tau, self.v, self.observables).with_multiplex(self.multiplex);
        cfg.input_qubit = self.input_qubit;
        cfg
    }
}

/// Seed of the input stream for realization seed `seed`. Streams depend on
/// the seed only, so every regime sees the same inputs for a given seed.
pub fn input_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}
