use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hmmem_cli::{run, CliError, ExperimentConfig, Task};

/// Classification with memory in hidden Markov models.
#[derive(Parser)]
#[command(name = "hmmem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a labeled sequence of length `--n`.
    Simulate(Common),
    /// Posterior of the current class given the configured window.
    Posterior(Common),
    /// Bayes risk for each memory in the configured range.
    Risk(Common),
    /// Bound constants and risk-gap curves.
    Bounds(Common),
    /// Kernel-rule error rates over memories, training sizes and bandwidths.
    KernelRisk(Common),
    /// The three-model simulation table.
    ReproduceSimTable(Common),
    /// Validate a labeled-sequence CSV.
    IngestCheck(Common),
    /// Run whatever task the config names.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Memory `L` or inclusive range `L..M`.
    #[arg(long)]
    l: Option<String>,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated bandwidths.
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
}

fn parse_memory(s: &str) -> Result<(usize, Option<usize>), CliError> {
    let bad = || CliError::Config(format!("invalid memory {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok((a.trim().parse().map_err(|_| bad())?, Some(b.trim().parse().map_err(|_| bad())?)))
        }
        None => Ok((s.trim().parse().map_err(|_| bad())?, None)),
    }
}

fn build(task: Option<Task>, args: Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if task.is_some() {
        cfg.task = task;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.out {
        cfg.out = Some(o);
    }
    if let Some(l) = &args.l {
        (cfg.l, cfg.l_max) = parse_memory(l)?;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(h) = args.h {
        cfg.h = h;
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("HMMEM_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("HMMEM_THREADS={v:?} is not a number")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match cli.command {
        Command::Simulate(a) => (Some(Task::Simulate), a),
        Command::Posterior(a) => (Some(Task::Posterior), a),
        Command::Risk(a) => (Some(Task::Risk), a),
        Command::Bounds(a) => (Some(Task::Bounds), a),
        Command::KernelRisk(a) => (Some(Task::KernelRisk), a),
        Command::ReproduceSimTable(a) => (Some(Task::ReproduceSimTable), a),
        Command::IngestCheck(a) => (Some(Task::IngestCheck), a),
        Command::Run(a) => (None, a),
    };
    let code = match init_threads().and_then(|()| build(task, args)) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
