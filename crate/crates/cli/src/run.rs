//! Task dispatch.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::time::Instant;

use hmmem::bounds::{BoundConstants, BetaMethod, Integration};
use hmmem::kernel::bandwidth_grid_eval;
use hmmem::posterior::bayes_risk_monte_carlo;
use hmmem::{
    bayes_risk_exact, derive_seed, posterior_window, simulate, validate_assumption_a, EmissionModel, Error,
    HiddenMarkovModel, KernelSpec, LabeledSequence, ObservationSpace, ObservationWindow, Provenance, RiskEstimate,
    RiskMethod, TrainingSequence,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, MethodChoice, Task};
use crate::csv_io::{ingest_labeled_csv, write_labeled_csv};
use crate::error::{CliError, CliResult};
use crate::experiments::{median, sim_table, sim_table_cells, sim_table_summary, SimTableOptions};
use crate::table::{format_float, Cell, ResultTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_MC_SAMPLES: u64 = 100_000;

/// What a task produces: the CSV artifact and a human-readable summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub csv: String,
    pub summary: String,
}

/// Runs the configured task and writes its artifacts. With `out` set the
/// CSV goes there and the summary to stdout; otherwise the CSV goes to
/// stdout and the summary to stderr. Returns the process exit code.
pub fn run(cfg: &ExperimentConfig) -> i32 {
    match execute(cfg).and_then(|r| emit(cfg, &r)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cfg: &ExperimentConfig, report: &Report) -> CliResult<()> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, &report.csv).map_err(|e| CliError::io(path, e))?;
            print!("{}", report.summary);
        }
        None => {
            print!("{}", report.csv);
            eprint!("{}", report.summary);
        }
    }
    std::io::stdout().flush().map_err(|e| CliError::io("<stdout>", e))
}

/// Runs the configured task without touching the filesystem beyond reading
/// inputs.
pub fn execute(cfg: &ExperimentConfig) -> CliResult<Report> {
    cfg.validate()?;
    let task = cfg.task.expect("validated");
    let mut meta = BTreeMap::new();
    meta.insert("config_hash".to_string(), cfg.hash()?);
    meta.insert("seed".to_string(), cfg.seed.to_string());
    meta.insert("task".to_string(), task.name().to_string());
    meta.insert("version".to_string(), VERSION.to_string());
    if task == Task::Simulate {
        return simulate_task(cfg, &meta);
    }
    let (mut table, summary) = match task {
        Task::Simulate => unreachable!(),
        Task::Posterior => posterior_task(cfg)?,
        Task::Risk => risk_task(cfg)?,
        Task::Bounds => bounds_task(cfg)?,
        Task::KernelRisk => kernel_risk_task(cfg)?,
        Task::ReproduceSimTable => sim_table_task(cfg)?,
        Task::IngestCheck => ingest_task(cfg)?,
    };
    table.metadata.extend(meta);
    let summary = format!("{}{}", table.to_text(), summary);
    Ok(Report { csv: table.to_csv(), summary })
}

fn simulate_task(cfg: &ExperimentConfig, meta: &BTreeMap<String, String>) -> CliResult<Report> {
    let model = cfg.model()?;
    let [len] = cfg.n[..] else {
        return Err(CliError::Config("simulate needs exactly one n (the sequence length)".into()));
    };
    let seq = simulate(&model, len, cfg.seed)?;
    let mut buf = Vec::new();
    write_labeled_csv(&mut buf, &seq, meta).expect("writing to memory");
    let counts = label_counts(&seq, model.classes());
    let summary = format!("simulated {len} steps, label counts {counts:?}\n");
    Ok(Report { csv: String::from_utf8(buf).expect("utf-8"), summary })
}

fn label_counts(seq: &LabeledSequence, classes: usize) -> Vec<usize> {
    let mut counts = vec![0; classes];
    for y in seq.labels() {
        counts[y.0] += 1;
    }
    counts
}

fn posterior_task(cfg: &ExperimentConfig) -> CliResult<(ResultTable, String)> {
    let model = cfg.model()?;
    let points = cfg.window.as_ref().ok_or_else(|| CliError::Config("posterior needs a window".into()))?;
    let space = model.emission().space();
    let obs = points.iter().map(|p| p.to_observation(space)).collect::<CliResult<Vec<_>>>()?;
    let window = ObservationWindow::new(obs)?;
    let post = posterior_window(&model, &window, None)?;
    let mut t = ResultTable::new(["class", "posterior"]);
    for (y, p) in post.probs.iter().enumerate() {
        t.push(vec![y.into(), Cell::Float(*p)]);
    }
    t.meta("decision", post.map_class());
    t.meta("log_evidence", format_float(post.log_evidence));
    t.meta("memory", window.memory());
    Ok((t, format!("decision: class {}\n", post.map_class())))
}

fn method_name(m: RiskMethod) -> &'static str {
    match m {
        RiskMethod::ExactEnumeration => "exact",
        RiskMethod::MonteCarlo => "monte_carlo",
    }
}

/// Bayes risk for one memory, dispatched on the configured method.
pub fn risk_for(cfg: &ExperimentConfig, model: &HiddenMarkovModel, l: usize) -> CliResult<RiskEstimate> {
    let exact = match cfg.method {
        MethodChoice::Auto => matches!(model.emission(), EmissionModel::Discrete(_)),
        MethodChoice::Exact => true,
        MethodChoice::MonteCarlo => false,
    };
    if exact {
        Ok(bayes_risk_exact(model, l)?)
    } else {
        let n = cfg.samples.unwrap_or(DEFAULT_MC_SAMPLES);
        Ok(bayes_risk_monte_carlo(model, l, n, derive_seed(cfg.seed, &[l as u64]), None)?)
    }
}

fn risk_task(cfg: &ExperimentConfig) -> CliResult<(ResultTable, String)> {
    let model = cfg.model()?;
    let mut t = ResultTable::new(["l", "risk", "std_error", "method", "n_samples"]);
    for l in cfg.memories() {
        let r = risk_for(cfg, &model, l)?;
        t.push(vec![l.into(), Cell::Float(r.value), Cell::Float(r.std_error), method_name(r.method).into(), r.n_samples.into()]);
    }
    Ok((t, String::new()))
}

fn bounds_task(cfg: &ExperimentConfig) -> CliResult<(ResultTable, String)> {
    let model = cfg.model()?;
    let report = validate_assumption_a(&model);
    if !report.holds {
        return Err(Error::AssumptionAViolated(report.violations.join(", ")).into());
    }
    let integration = match (BoundConstants::default_integration(&model, cfg.seed), cfg.beta_samples) {
        (Integration::MonteCarlo { seed, .. }, Some(n)) => Integration::MonteCarlo { n, seed },
        (i, _) => i,
    };
    let c = BoundConstants::compute(&model, integration)?;
    let mut t = ResultTable::new(["key", "value"]);
    let mut kv = |k: &str, v: Cell| t.push(vec![k.into(), v]);
    kv("alpha", Cell::Float(c.alpha));
    kv("eta", Cell::Float(c.eta));
    kv("beta", Cell::Float(c.beta));
    kv("gamma", Cell::Float(c.gamma));
    kv("a", Cell::Float(c.a));
    kv("b", Cell::Float(c.b));
    kv("one_step_contractive", c.one_step_contractive.to_string().into());
    match c.beta_method {
        BetaMethod::ExactSum => kv("beta_method", "exact_sum".into()),
        BetaMethod::MonteCarlo { n, std_error, .. } => {
            kv("beta_method", "monte_carlo".into());
            kv("beta_samples", n.into());
            kv("beta_std_error", Cell::Float(std_error));
        }
    }
    for l in 0..=*cfg.memories().end() {
        let b = c.risk_gap_bounds(l).clipped();
        kv(&format!("same_model_bound_l{l}"), Cell::Float(b.same_model));
        kv(&format!("general_bound_l{l}"), Cell::Float(b.general));
    }
    Ok((t, String::new()))
}

/// Class count and observation space for data files.
fn data_space(cfg: &ExperimentConfig) -> CliResult<(usize, ObservationSpace)> {
    if let Some(spec) = cfg.model_spec()? {
        let model = spec.build()?;
        return Ok((model.classes(), model.emission().space()));
    }
    match (cfg.classes, cfg.dim) {
        (Some(c), Some(d)) if c >= 1 && d >= 1 => Ok((c, ObservationSpace::Continuous { dim: d })),
        _ => Err(CliError::Config("data files need a model or both classes and dim".into())),
    }
}

fn kernel_risk_task(cfg: &ExperimentConfig) -> CliResult<(ResultTable, String)> {
    let kernel = KernelSpec::new(cfg.kernel);
    let grid = if cfg.h.is_empty() { vec![1.0] } else { cfg.h.clone() };
    let mut t = ResultTable::new(["l", "n", "h", "median_error", "min_error", "max_error", "replicates"]);
    let push = |t: &mut ResultTable, l: usize, n: usize, h: f64, errs: &[f64]| {
        let lo = errs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = errs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        t.push(vec![
            l.into(),
            n.into(),
            Cell::Float(h),
            Cell::Float(median(errs)),
            Cell::Float(lo),
            Cell::Float(hi),
            errs.len().into(),
        ]);
    };
    if let Some(data) = &cfg.data {
        let (classes, space) = data_space(cfg)?;
        let test_path = cfg.test_data.as_ref().ok_or_else(|| CliError::Config("data needs test_data".into()))?;
        let train = ingest_labeled_csv(data, classes, space)?;
        let test = ingest_labeled_csv(test_path, classes, space)?;
        let training = TrainingSequence::new(train, Provenance::Ingested);
        for l in cfg.memories() {
            for (h, r) in bandwidth_grid_eval(&training, l, kernel, classes, &grid, &test)? {
                push(&mut t, l, training.sequence.len().saturating_sub(l), h, &[r.value]);
            }
        }
        return Ok((t, String::new()));
    }
    let model = cfg.model()?;
    if cfg.n.is_empty() {
        return Err(CliError::Config("kernel-risk needs training sizes n or a data file".into()));
    }
    let mut jobs = Vec::new();
    for l in cfg.memories() {
        for &n in &cfg.n {
            for rep in 0..cfg.replicates {
                jobs.push((l, n, rep));
            }
        }
    }
    let results = jobs
        .par_iter()
        .map(|&(l, n, rep)| {
            let tags = [l as u64, n as u64, rep as u64];
            let train_seed = derive_seed(cfg.seed, &[tags[0], tags[1], tags[2], 0]);
            let test_seed = derive_seed(cfg.seed, &[tags[0], tags[1], tags[2], 1]);
            let train = simulate(&model, n + l, train_seed)?;
            let test = simulate(&model, cfg.test_windows + l, test_seed)?;
            let training = TrainingSequence::new(train, Provenance::Simulated { seed: train_seed });
            bandwidth_grid_eval(&training, l, kernel, model.classes(), &grid, &test)
        })
        .collect::<hmmem::Result<Vec<_>>>()?;
    for (job, res) in jobs.chunks(cfg.replicates).zip(results.chunks(cfg.replicates)) {
        let (l, n, _) = job[0];
        for (k, &h) in grid.iter().enumerate() {
            let errs: Vec<f64> = res.iter().map(|r| r[k].1.value).collect();
            push(&mut t, l, n, h, &errs);
        }
    }
    t.meta("kernel", cfg.kernel);
    t.meta("test_windows", cfg.test_windows);
    Ok((t, String::new()))
}

pub fn sim_table_options(cfg: &ExperimentConfig) -> CliResult<SimTableOptions> {
    let bandwidth = match cfg.h[..] {
        [] => 1.0,
        [h] => h,
        _ => return Err(CliError::Config("reproduce-sim-table takes a single bandwidth".into())),
    };
    Ok(SimTableOptions {
        seed: cfg.seed,
        test_windows: cfg.test_windows,
        replicates: cfg.replicates,
        bandwidth,
        kernel: cfg.kernel,
    })
}

fn sim_table_task(cfg: &ExperimentConfig) -> CliResult<(ResultTable, String)> {
    let opts = sim_table_options(cfg)?;
    let start = Instant::now();
    let cells = sim_table_cells(&opts)?;
    let elapsed = start.elapsed().as_secs_f64();
    let t = sim_table(&cells, &opts);
    Ok((t, format!("\n{}elapsed: {elapsed:.1} s\n", sim_table_summary(&cells))))
}

fn ingest_task(cfg: &ExperimentConfig) -> CliResult<(ResultTable, String)> {
    let data = cfg.data.as_ref().ok_or_else(|| CliError::Config("ingest-check needs data".into()))?;
    let (classes, space) = data_space(cfg)?;
    let seq = ingest_labeled_csv(data, classes, space)?;
    let mut t = ResultTable::new(["class", "count"]);
    for (y, c) in label_counts(&seq, classes).into_iter().enumerate() {
        t.push(vec![y.into(), c.into()]);
    }
    t.meta("length", seq.len());
    Ok((t, format!("{} rows ok\n", seq.len())))
}
