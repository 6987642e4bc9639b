//! Command-line front end for the survival-aggregation pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/contract error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use apter::aggregation::{ApterModel, NuPolicy};
use apter::harness::{
    regret_study, run_experiment, ExperimentSpec, Method, NuTuning, ScreeningParams, DEFAULT_FOLDS,
};
use apter::screening::{isis, sis, ScreeningResult};
use apter::survival::{c_index, load_csv, write_csv, SurvivalDataset};
use apter::synthetic::{generate, SyntheticConfig};
use apter::{Error, Result};

#[derive(Parser)]
#[command(
    name = "apter",
    about = "Prognostic-index learning for right-censored survival data",
    version
)]
struct Cli {
    /// Size of the worker pool for parallel sections. Outputs do not depend
    /// on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Simulate(SimulateArgs),
    /// Rank features by marginal screening and emit the retained set.
    Screen(ScreenArgs),
    /// Fit a model on a CSV dataset and write it as JSON.
    Train(TrainArgs),
    /// Score subjects with a trained model.
    Predict(PredictArgs),
    /// Concordance index of a score file against a dataset.
    Evaluate(EvaluateArgs),
    /// Randomized train/test protocol over many replications.
    Benchmark(BenchmarkArgs),
    /// Concordance-gap sweep over (n, d) grids on synthetic data.
    Regret(RegretArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Number of informative features.
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    censor_rate: f64,
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional ground-truth CSV (columns T,C).
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScreenMethod {
    Sis,
    Isis,
}

#[derive(Args)]
struct ScreenArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "sis")]
    method: ScreenMethod,
    /// Features to retain (single-pass screening).
    #[arg(long)]
    count: Option<usize>,
    /// Features added per iteration (iterated screening).
    #[arg(long)]
    per_step: Option<usize>,
    /// Total features to retain (iterated screening).
    #[arg(long)]
    target: Option<usize>,
    /// Nu for the internal fits of iterated screening: "theoretical" or a number.
    #[arg(long, default_value = "theoretical")]
    nu: String,
    /// Retained indices as JSON.
    #[arg(long)]
    out_json: PathBuf,
    /// Optional CSV of (feature, score).
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrainMethod {
    Apter,
    ApterP,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "apter-p")]
    method: TrainMethod,
    /// "theoretical", "cv", or an explicit positive number.
    #[arg(long, default_value = "theoretical")]
    nu: String,
    /// CV grid as multipliers of the theoretical nu.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    /// Enable iterated screening before training: features per step.
    #[arg(long)]
    screen_per_step: Option<usize>,
    /// Enable iterated screening before training: total features.
    #[arg(long)]
    screen_target: Option<usize>,
    /// Output model JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV with a single `score` column, one row per subject.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Score CSV as produced by `predict`.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Optional JSON output path; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchMethod {
    Apter,
    ApterP,
    IsisApterP,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "apter-p")]
    method: BenchMethod,
    #[arg(long, default_value_t = 50)]
    replications: usize,
    /// "theoretical" or "cv".
    #[arg(long, default_value = "theoretical")]
    nu: String,
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long)]
    screen_per_step: Option<usize>,
    #[arg(long)]
    screen_target: Option<usize>,
    #[arg(long)]
    seed: u64,
    /// Directory receiving replications.csv, summary.json and timing.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RegretArgs {
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    d_list: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    replications: usize,
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        // ignore failure when a pool already exists (e.g. under test)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Screen(args) => screen(args),
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Benchmark(args) => benchmark(args),
        Command::Regret(args) => regret(args),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let config = SyntheticConfig::new(args.n, args.d, args.k, args.seed)
        .with_censor_rate(args.censor_rate);
    let (dataset, truth) = generate(&config)?;
    write_csv(&dataset, &args.out)?;
    if let Some(truth_path) = args.truth {
        let mut body = String::from("T,C\n");
        for t in &truth {
            let _ = writeln!(body, "{},{}", t.failure, t.censoring);
        }
        std::fs::write(truth_path, body)?;
    }
    Ok(())
}

fn parse_nu_policy(raw: &str) -> Result<NuPolicy> {
    if raw == "theoretical" {
        return Ok(NuPolicy::Theoretical);
    }
    let value: f64 = raw
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("nu must be 'theoretical' or a number, got {raw:?}")))?;
    Ok(NuPolicy::Fixed(value))
}

fn write_screen_outputs(args: &ScreenArgs, result: &ScreeningResult, config: serde_json::Value) -> Result<()> {
    let payload = json!({
        "schema": 1,
        "config": config,
        "retained": result.retained,
        "scores": result.scores,
        "iterations": result.iterations,
    });
    std::fs::write(&args.out_json, format!("{}\n", serde_json::to_string_pretty(&payload)?))?;
    if let Some(csv_path) = &args.out_csv {
        let mut body = String::from("feature,score\n");
        for (j, s) in result.retained.iter().zip(&result.scores) {
            let _ = writeln!(body, "{j},{s}");
        }
        std::fs::write(csv_path, body)?;
    }
    Ok(())
}

fn screen(args: ScreenArgs) -> Result<()> {
    let dataset = load_csv(&args.data)?;
    match args.method {
        ScreenMethod::Sis => {
            let count = args.count.ok_or_else(|| {
                Error::InvalidConfig("--count is required for sis".into())
            })?;
            let response: Vec<f64> = dataset.records().iter().map(|r| r.time()).collect();
            let result = sis(&dataset, &response, count)?;
            let config = json!({
                "method": "sis",
                "data": args.data.display().to_string(),
                "count": count,
            });
            write_screen_outputs(&args, &result, config)
        }
        ScreenMethod::Isis => {
            let per_step = args.per_step.ok_or_else(|| {
                Error::InvalidConfig("--per-step is required for isis".into())
            })?;
            let target = args.target.ok_or_else(|| {
                Error::InvalidConfig("--target is required for isis".into())
            })?;
            let nu_policy = parse_nu_policy(&args.nu)?;
            let result = isis(&dataset, per_step, target, nu_policy)?;
            let config = json!({
                "method": "isis",
                "data": args.data.display().to_string(),
                "per_step": per_step,
                "target": target,
                "nu": args.nu,
            });
            write_screen_outputs(&args, &result, config)
        }
    }
}

fn train(args: TrainArgs) -> Result<()> {
    let dataset = load_csv(&args.data)?;

    let method = match (args.method, args.screen_per_step.is_some() || args.screen_target.is_some()) {
        (TrainMethod::Apter, false) => Method::Apter,
        (TrainMethod::ApterP, false) => Method::ApterP,
        (TrainMethod::ApterP, true) => Method::IsisApterP,
        (TrainMethod::Apter, true) => {
            return Err(Error::InvalidConfig(
                "screening is only supported with --method apter-p".into(),
            ))
        }
    };
    let screening = match (args.screen_per_step, args.screen_target) {
        (Some(per_step), Some(target)) => Some(ScreeningParams { per_step, target }),
        (None, None) => None,
        _ => {
            return Err(Error::InvalidConfig(
                "--screen-per-step and --screen-target must be given together".into(),
            ))
        }
    };

    let mut spec = ExperimentSpec::new(method, 1, 0);
    spec.folds = args.folds;
    if let Some(grid) = args.grid {
        spec.grid_factors = grid;
    }
    spec.screening = screening;

    let model = match args.nu.as_str() {
        "theoretical" => {
            spec.nu_tuning = NuTuning::Theoretical;
            apter::harness::fit_method(&dataset, &spec)?
        }
        "cv" => {
            spec.nu_tuning = NuTuning::CrossValidated;
            apter::harness::fit_method(&dataset, &spec)?
        }
        raw => {
            let nu: f64 = raw.parse().map_err(|_| {
                Error::InvalidConfig(format!(
                    "nu must be 'theoretical', 'cv' or a number, got {raw:?}"
                ))
            })?;
            fit_fixed_nu(&dataset, &spec, nu)?
        }
    };
    model.save(&args.out)
}

fn fit_fixed_nu(dataset: &SurvivalDataset, spec: &ExperimentSpec, nu: f64) -> Result<ApterModel> {
    use apter::experts::{build_duplicated, build_signed};
    let screened = match spec.method {
        Method::IsisApterP => {
            let params = spec.screening.ok_or_else(|| {
                Error::InvalidConfig("screening parameters are required".into())
            })?;
            Some(isis(dataset, params.per_step, params.target, NuPolicy::Fixed(nu))?.retained)
        }
        _ => None,
    };
    let bank = match spec.method {
        Method::Apter => build_duplicated(dataset, screened.as_deref())?,
        Method::ApterP | Method::IsisApterP => build_signed(dataset, screened.as_deref())?,
    };
    let model = apter::aggregation::train(bank, dataset, nu)?;
    Ok(match screened {
        Some(features) => model.with_screened_features(features),
        None => model,
    })
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = ApterModel::load(&args.model)?;
    let dataset = load_csv(&args.data)?;
    let scores = model.predict_dataset(&dataset)?;
    let mut body = String::from("score\n");
    for s in &scores {
        let _ = writeln!(body, "{s}");
    }
    std::fs::write(&args.out, body)?;
    Ok(())
}

fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let body = std::fs::read_to_string(path)?;
    let mut lines = body.lines();
    match lines.next() {
        Some("score") => {}
        other => {
            return Err(Error::Header(format!(
                "score file must start with a 'score' header, found {other:?}"
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            line.trim().parse().map_err(|_| Error::Cell {
                row: i + 1,
                column: "score".into(),
                message: format!("cannot parse {line:?} as a number"),
            })
        })
        .collect()
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let dataset = load_csv(&args.data)?;
    let scores = read_scores(&args.scores)?;
    let result = c_index(&scores, &dataset)?;
    let payload = json!({
        "schema": 1,
        "config": {
            "scores": args.scores.display().to_string(),
            "data": args.data.display().to_string(),
        },
        "c_index": result.c_index,
        "comparable_pairs": result.comparable_pairs,
        "concordant_pairs": result.concordant_pairs,
    });
    let rendered = format!("{}\n", serde_json::to_string_pretty(&payload)?);
    match args.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<()> {
    let dataset = load_csv(&args.data)?;
    let method = match args.method {
        BenchMethod::Apter => Method::Apter,
        BenchMethod::ApterP => Method::ApterP,
        BenchMethod::IsisApterP => Method::IsisApterP,
    };
    let mut spec = ExperimentSpec::new(method, args.replications, args.seed);
    spec.nu_tuning = match args.nu.as_str() {
        "theoretical" => NuTuning::Theoretical,
        "cv" => NuTuning::CrossValidated,
        raw => {
            return Err(Error::InvalidConfig(format!(
                "nu must be 'theoretical' or 'cv' for benchmark, got {raw:?}"
            )))
        }
    };
    if let Some(grid) = args.grid.clone() {
        spec.grid_factors = grid;
    }
    spec.folds = args.folds;
    spec.screening = match (args.screen_per_step, args.screen_target) {
        (Some(per_step), Some(target)) => Some(ScreeningParams { per_step, target }),
        (None, None) => None,
        _ => {
            return Err(Error::InvalidConfig(
                "--screen-per-step and --screen-target must be given together".into(),
            ))
        }
    };

    let report = run_experiment(&dataset, &spec)?;

    std::fs::create_dir_all(&args.out_dir)?;
    // primary output: deterministic per-replication rows
    let mut rows = String::from("seed,c_index,nu\n");
    for r in &report.per_replication {
        match r.c_index {
            Some(c) => {
                let _ = writeln!(rows, "{},{},{}", r.seed, c, r.nu);
            }
            None => {
                let _ = writeln!(rows, "{},undefined,{}", r.seed, r.nu);
            }
        }
    }
    std::fs::write(args.out_dir.join("replications.csv"), rows)?;

    // sidecar: wall-clock per replication (non-deterministic by nature)
    let mut timing = String::from("seed,wall_ms\n");
    for r in &report.per_replication {
        let _ = writeln!(timing, "{},{}", r.seed, r.wall_ms);
    }
    std::fs::write(args.out_dir.join("timing.csv"), timing)?;

    let summary = json!({
        "schema": 1,
        "config": {
            "data": args.data.display().to_string(),
            "method": method.name(),
            "replications": args.replications,
            "nu": args.nu,
            "grid_factors": spec.grid_factors,
            "folds": spec.folds,
            "screen_per_step": args.screen_per_step,
            "screen_target": args.screen_target,
            "seed": args.seed,
        },
        "median": report.summary.median,
        "variance": report.summary.variance,
        "iqr": report.summary.iqr,
        "defined": report.summary.defined,
        "undefined": report.summary.undefined,
    });
    std::fs::write(
        args.out_dir.join("summary.json"),
        format!("{}\n", serde_json::to_string_pretty(&summary)?),
    )?;
    if report.summary.undefined > 0 {
        eprintln!(
            "warning: {} replication(s) had no comparable test pairs and were excluded from the summary",
            report.summary.undefined
        );
    }
    Ok(())
}

fn regret(args: RegretArgs) -> Result<()> {
    let rows = regret_study(&args.n_list, &args.d_list, args.replications, args.seed)?;
    let mut body = String::from("n,d,m,c_err_median,c_err_mean,bound\n");
    for r in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{}",
            r.n, r.d, r.m, r.c_err_median, r.c_err_mean, r.bound
        );
    }
    std::fs::write(&args.out, body)?;
    Ok(())
}
