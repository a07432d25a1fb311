use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nmqrc::config::{ExperimentConfig, Scale, Task};
use nmqrc::harness::{self, HarnessError};

#[derive(Parser)]
#[command(name = "nmqrc", version, about = "Quantum reservoir computing benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Short-term memory capacity versus delay.
    Stm(RunArgs),
    /// NARMA emulation scores versus order.
    Narma(RunArgs),
    /// Echo-state diagnostics from two initial states.
    Esp(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override sizes with a preset scale.
    #[arg(long, value_enum)]
    scale: Option<Scale>,
    /// Use seeds 0..k instead of the configured list.
    #[arg(long, value_name = "K")]
    seeds: Option<usize>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Config(_) => 2,
        HarnessError::Run(_) => 3,
        HarnessError::Output { .. } | HarnessError::Pool(_) => 1,
    }
}

fn run(task: Task, args: RunArgs) -> Result<Vec<PathBuf>, HarnessError> {
    let mut cfg = ExperimentConfig::load(&args.config, task)?;
    if let Some(scale) = args.scale {
        cfg.apply_scale(scale);
    }
    if let Some(k) = args.seeds {
        cfg.set_seed_count(k);
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    cfg.validate()?;
    match task {
        Task::Stm => harness::write_sweep(&cfg, &harness::run_stm(&cfg)?),
        Task::Narma => harness::write_sweep(&cfg, &harness::run_narma(&cfg)?),
        Task::Esp => harness::write_esp(&cfg, &harness::run_esp(&cfg)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match cli.command {
        Command::Stm(a) => (Task::Stm, a),
        Command::Narma(a) => (Task::Narma, a),
        Command::Esp(a) => (Task::Esp, a),
    };
    match run(task, args) {
        Ok(paths) => {
            for p in paths.iter().filter(|p| p.ends_with("summary.csv")) {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
