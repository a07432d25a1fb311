//! Experiment harness for the quantum reservoir simulator in `nmqrc-core`:
//! config files, seed sweeps over coupling regimes, and CSV/JSON output.

pub mod config;
pub mod formats;
pub mod harness;

pub use config::{ConfigError, ExperimentConfig, Scale, Task};
pub use harness::{run_esp, run_narma, run_stm, HarnessError};
