//! Command-line front end. Results go to stdout, diagnostics to stderr.
//! Exit codes: 0 success, 1 runtime failure, 2 invalid flags.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hdlda::classifiers::{evaluate, fit, ClassifierModel, Method, Params};
use hdlda::dataset::{write_predictions, DatasetCsv};
use hdlda::estimators::sparsity_and_rates;
use hdlda::numerics::rng_stream;
use hdlda::population::{check_conditions, mahalanobis_matrix, make_sim_model, r_opt, sample_dataset, PopulationModel, PopulationSpec};
use hdlda::simharness::{aggregates_path, run_experiment, write_aggregates, write_results_csv_to, ExperimentConfig};
use hdlda::theory::{bound_with_mc, example_bounds, k2_equality_value, pair_geometry};
use hdlda::tuning::{grid_search, Grid, DEFAULT_FOLDS};

/// Flag validation failure, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "hdlda", version, about = "High-dimensional linear discriminant analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation protocol and write per-replication and aggregate CSVs.
    Simulate(SimulateArgs),
    /// Tune by cross-validation, fit on a labelled CSV and save the model.
    Fit(FitArgs),
    /// Predict classes for a CSV with a saved model.
    Predict(PredictArgs),
    /// Population diagnostics: conditions, Mahalanobis distances, optimal error, rates.
    Oracle(OracleArgs),
    /// Misclassification-gap bound of a fitted rule, or the parallel-boundary example.
    Bound(BoundArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration JSON; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<u8>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of opt,glda,slda1,slda2,lpd,nsc.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to `<out stem>_aggregates.csv`.
    #[arg(long)]
    aggregate_out: Option<PathBuf>,
    /// Worker threads; 0 uses every logical core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Record wall-clock seconds per method (output is then machine dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    train: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    cv_folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PopulationArgs {
    /// Population JSON.
    #[arg(long, conflicts_with_all = ["model", "p", "k"])]
    population: Option<PathBuf>,
    /// Simulation model 1, 2 or 3 (with --p and --k).
    #[arg(long, requires_all = ["p", "k"])]
    model: Option<u8>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
}

impl PopulationArgs {
    fn load(&self) -> Result<PopulationModel> {
        match (&self.population, self.model) {
            (Some(path), _) => {
                let text = read(path)?;
                Ok(PopulationSpec::from_json(&text)?.build()?)
            }
            (None, Some(m)) => Ok(make_sim_model(m, self.p.unwrap(), self.k.unwrap())?),
            (None, None) => Err(usage("give --population or --model/--p/--k")),
        }
    }
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    population: PopulationArgs,
    #[arg(long, default_value_t = 100_000)]
    mc: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training size for the rate report; omitted means no rates.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    h: f64,
    #[arg(long, default_value_t = 0.5)]
    g: f64,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    m2: f64,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    population: PopulationArgs,
    #[arg(long)]
    method: Option<Method>,
    /// Total training size, a multiple of K.
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    mc: usize,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    cv_folds: usize,
    /// Evaluate the three-class parallel-boundary example instead.
    #[arg(long, requires_all = ["d", "eps"])]
    example: bool,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_json(&read(path)?).map_err(|e| usage(e.to_string()))?,
        None => {
            let (Some(m), Some(p), Some(k)) = (a.model, a.p, a.k) else {
                return Err(usage("--model, --p and --k are required without --config"));
            };
            ExperimentConfig::new(m, p, k)
        }
    };
    if a.config.is_some() {
        cfg.model_id = a.model.unwrap_or(cfg.model_id);
        cfg.p = a.p.unwrap_or(cfg.p);
        cfg.k = a.k.unwrap_or(cfg.k);
    }
    cfg.reps = a.reps.unwrap_or(cfg.reps);
    cfg.master_seed = a.seed.unwrap_or(cfg.master_seed);
    cfg.n_train = a.n_train.unwrap_or(cfg.n_train);
    cfg.n_test = a.n_test.unwrap_or(cfg.n_test);
    cfg.cv_folds = a.cv_folds.unwrap_or(cfg.cv_folds);
    if let Some(m) = a.methods {
        cfg.methods = m;
    }
    cfg.timing |= a.timing;
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    eprintln!("model {} p={} K={}: {} replications of {:?}", cfg.model_id, cfg.p, cfg.k, cfg.reps, cfg.methods);
    let result = run_experiment(&cfg, a.workers)?;
    let agg_path = a.aggregate_out.unwrap_or_else(|| aggregates_path(&a.out));
    write_results_csv_to(&result, &a.out, &agg_path)?;
    write_aggregates(&result.aggregates, std::io::stdout().lock())?;
    eprintln!("wrote {} and {}", a.out.display(), agg_path.display());
    Ok(())
}

fn fit_cmd(a: FitArgs) -> Result<()> {
    if a.method == Method::Opt {
        return Err(usage("the optimal rule needs a population specification, not data; use `oracle`"));
    }
    let data = DatasetCsv::read(&a.train)?.to_sample()?;
    let (params, cv_error) = if a.method.is_tunable() {
        let grid = Grid::for_data(a.method, &data)?;
        let cv = grid_search(a.method, &data, &grid, a.cv_folds, &mut rng_stream(a.seed, 0))?;
        (cv.best_params, Some(cv.best_error))
    } else {
        (Params::default(), None)
    };
    let model = fit(a.method, &data, &params)?;
    std::fs::write(&a.model_out, model.to_json()).with_context(|| format!("cannot write {}", a.model_out.display()))?;
    let train_error = evaluate(&model, &data)?.error_rate;
    print_json(&json!({
        "method": a.method,
        "params": model.params(),
        "cv_error": cv_error,
        "training_error": train_error,
        "n": data.n(),
        "p": data.p(),
        "k": data.k,
    }))
}

fn predict_cmd(a: PredictArgs) -> Result<()> {
    let model = ClassifierModel::from_json(&read(&a.model)?)?;
    let data = DatasetCsv::read(&a.data)?;
    if data.x.cols() != model.p() {
        bail!("feature count mismatch: model expects {} features, {} has {}", model.p(), a.data.display(), data.x.cols());
    }
    let predicted = model.predict_all(&data.x);
    let f = std::fs::File::create(&a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    write_predictions(f, &predicted)?;
    let error_rate = match &data.labels {
        Some(labels) => {
            let sample = hdlda::population::LabeledSample::new(data.x.clone(), labels.clone(), model.k())
                .map_err(|e| anyhow!("labels do not match the model: {e}"))?;
            Some(evaluate(&model, &sample)?.error_rate)
        }
        None => None,
    };
    print_json(&json!({ "rows": predicted.len(), "error_rate": error_rate }))
}

fn oracle(a: OracleArgs) -> Result<()> {
    let model = a.population.load()?;
    let conditions = check_conditions(&model, None);
    let (maha, m_min, m_max) = mahalanobis_matrix(&model);
    let ropt = r_opt(&model, a.mc, &mut rng_stream(a.seed, 0))?;
    let rates = match a.n {
        Some(n) => Some(sparsity_and_rates(&model, n, model.k(), a.h, a.g, a.alpha, a.r, a.m2)?),
        None => None,
    };
    print_json(&json!({
        "k": model.k(),
        "p": model.p(),
        "conditions": conditions,
        "mahalanobis": { "matrix": maha, "m_min": m_min, "m_max": m_max },
        "r_opt": ropt,
        "rates": rates,
    }))
}

fn bound(a: BoundArgs) -> Result<()> {
    if a.example {
        let b = example_bounds(a.d.unwrap(), a.eps.unwrap()).map_err(|e| usage(e.to_string()))?;
        return print_json(&serde_json::to_value(b)?);
    }
    let (Some(method), Some(n_train)) = (a.method, a.n_train) else {
        return Err(usage("--method and --n-train are required (or use --example)"));
    };
    let truth = Arc::new(a.population.load()?);
    let k = truth.k();
    if n_train == 0 || n_train % k != 0 {
        return Err(usage(format!("--n-train must be a positive multiple of K = {k}")));
    }
    let opt = ClassifierModel::opt(truth.clone());
    let mut rng = rng_stream(a.seed, 0);
    let model = if method == Method::Opt {
        opt.clone()
    } else {
        let train = sample_dataset(&truth, n_train / k, &mut rng);
        let params = if method.is_tunable() {
            grid_search(method, &train, &Grid::for_data(method, &train)?, a.cv_folds, &mut rng)?.best_params
        } else {
            Params::default()
        };
        fit(method, &train, &params)?
    };
    let report = bound_with_mc(&truth, &model, &opt, a.mc, &mut rng_stream(a.seed, 1))?;
    let k2 = if k == 2 {
        let value = k2_equality_value(&pair_geometry(&truth, &model)?)?;
        let gap = report.gap_est.unwrap();
        Some(json!({ "equality_value": value, "residual": value - gap, "gap_se": report.gap_se }))
    } else {
        None
    };
    print_json(&json!({
        "method": method,
        "params": model.params(),
        "report": report,
        "k2_equality": k2,
    }))
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Bound(a) => bound(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
