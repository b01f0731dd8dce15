//! Seeded simulation experiments over the three simulation models: draw
//! train and test sets, tune by cross-validation, fit, evaluate, aggregate.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{evaluate, fit, paired_conditional_errors, ClassifierModel, Method, Params};
use crate::error::{Error, Result};
use crate::numerics::{rng_stream, RngStream};
use crate::population::{make_sim_model, sample_dataset, LabeledSample, PopulationModel};
use crate::tuning::{grid_search_with_folds, stratified_folds, Grid, DEFAULT_FOLDS};

fn default_n() -> usize {
    450
}
fn default_reps() -> usize {
    50
}
fn default_folds() -> usize {
    DEFAULT_FOLDS
}
fn default_mc() -> usize {
    100_000
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model_id: u8,
    pub p: usize,
    pub k: usize,
    #[serde(default = "default_n")]
    pub n_train: usize,
    #[serde(default = "default_n")]
    pub n_test: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub master_seed: u64,
    /// Replaces the default grid of each listed method.
    #[serde(default)]
    pub grids: Vec<Grid>,
    #[serde(default = "default_mc")]
    pub mc_samples: usize,
    /// Record wall-clock seconds; when off the column is 0 and output is
    /// reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(model_id: u8, p: usize, k: usize) -> Self {
        ExperimentConfig {
            model_id,
            p,
            k,
            n_train: default_n(),
            n_test: default_n(),
            reps: default_reps(),
            cv_folds: default_folds(),
            methods: default_methods(),
            master_seed: 0,
            grids: vec![],
            mc_samples: default_mc(),
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the design and builds the population.
    pub fn validate(&self) -> Result<PopulationModel> {
        let model = make_sim_model(self.model_id, self.p, self.k)?;
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        for (name, n) in [("n_train", self.n_train), ("n_test", self.n_test)] {
            if n == 0 || n % self.k != 0 {
                return Err(Error::InvalidParameter(format!("{name} = {n} must be a positive multiple of K = {}", self.k)));
            }
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 folds, got {}", self.cv_folds)));
        }
        if self.n_train / self.k < self.cv_folds {
            return Err(Error::ClassTooSmall { class: 1, count: self.n_train / self.k, folds: self.cv_folds });
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods selected".into()));
        }
        if let Some(g) = self.grids.iter().find(|g| !g.method.is_tunable()) {
            return Err(Error::InvalidParameter(format!("{} has no tuning parameters", g.method)));
        }
        Ok(model)
    }

    fn grid_for(&self, method: Method, train: &LabeledSample) -> Result<Grid> {
        match self.grids.iter().find(|g| g.method == method) {
            Some(g) => Ok(g.clone()),
            None => Grid::for_data(method, train),
        }
    }
}

/// One method on one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepRow {
    pub method: Method,
    pub rep: usize,
    /// Seed of the replication's random stream.
    pub seed: u64,
    /// Test error; `None` when fitting failed.
    pub error: Option<f64>,
    pub seconds: f64,
    pub params: Option<Params>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodAggregate {
    pub method: Method,
    pub mean_error: f64,
    pub sd_error: f64,
    pub mean_seconds: f64,
    pub sd_seconds: f64,
    pub reps_used: usize,
    /// False when fewer than two rows were usable, in which case the
    /// standard deviations are reported as 0.
    pub sd_defined: bool,
}

impl MethodAggregate {
    /// Standard error of `mean_error`.
    pub fn se_error(&self) -> f64 {
        if self.reps_used == 0 {
            f64::NAN
        } else {
            self.sd_error / (self.reps_used as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Ordered by replication, then by method in configuration order.
    pub rows: Vec<RepRow>,
    pub aggregates: Vec<MethodAggregate>,
}

impl ExperimentResult {
    pub fn aggregate(&self, method: Method) -> Option<&MethodAggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64, bool) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, false);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0, false);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt(), true)
}

/// Per-method means and sample standard deviations over usable rows, in
/// the order of `methods`.
pub fn aggregate_rows(rows: &[RepRow], methods: &[Method]) -> Vec<MethodAggregate> {
    methods
        .iter()
        .map(|&method| {
            let used: Vec<&RepRow> = rows.iter().filter(|r| r.method == method && r.error.is_some()).collect();
            let errors: Vec<f64> = used.iter().map(|r| r.error.unwrap()).collect();
            let secs: Vec<f64> = used.iter().map(|r| r.seconds).collect();
            let (mean_error, sd_error, sd_defined) = mean_sd(&errors);
            let (mean_seconds, sd_seconds, _) = mean_sd(&secs);
            MethodAggregate { method, mean_error, sd_error, mean_seconds, sd_seconds, reps_used: used.len(), sd_defined }
        })
        .collect()
}

fn tune_and_fit(method: Method, train: &LabeledSample, folds: &[usize], grid: impl FnOnce() -> Result<Grid>) -> Result<ClassifierModel> {
    if !method.is_tunable() {
        return fit(method, train, &Params::default());
    }
    let cv = grid_search_with_folds(method, train, &grid()?, folds)?;
    fit(method, train, &cv.best_params)
}

/// Draws the training set, the test set and the fold assignment, in that
/// order, from the replication's stream.
fn draw_replication(model: &PopulationModel, config: &ExperimentConfig, rng: &mut RngStream) -> Result<(LabeledSample, LabeledSample, Vec<usize>)> {
    let train = sample_dataset(model, config.n_train / config.k, rng);
    let test = sample_dataset(model, config.n_test / config.k, rng);
    let folds = stratified_folds(&train.labels, config.cv_folds, rng)?;
    Ok((train, test, folds))
}

fn replication_rows(model: &Arc<PopulationModel>, config: &ExperimentConfig, rep: usize) -> Result<Vec<RepRow>> {
    let mut rng = rng_stream(config.master_seed, rep as u64);
    let seed = rng.seed();
    let (train, test, folds) = draw_replication(model, config, &mut rng)?;
    let mut rows = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let start = Instant::now();
        let fitted = match method {
            Method::Opt => Ok(ClassifierModel::opt(model.clone())),
            _ => tune_and_fit(method, &train, &folds, || config.grid_for(method, &train)),
        };
        let error = match &fitted {
            Ok(m) => Some(evaluate(m, &test)?.error_rate),
            Err(_) => None,
        };
        let seconds = if config.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        let params = fitted.ok().map(|m| m.params());
        rows.push(RepRow { method, rep, seed, error, seconds, params });
    }
    Ok(rows)
}

/// All methods on replication `rep`.
pub fn run_replication(config: &ExperimentConfig, rep: usize) -> Result<Vec<RepRow>> {
    let model = Arc::new(config.validate()?);
    replication_rows(&model, config, rep)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        b = b.num_threads(workers);
    }
    b.build().map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

/// Runs every replication on `workers` threads (0 means one per core). The
/// result does not depend on the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    let model = Arc::new(config.validate()?);
    let per_rep: Vec<Result<Vec<RepRow>>> =
        pool(workers)?.install(|| (0..config.reps).into_par_iter().map(|rep| replication_rows(&model, config, rep)).collect());
    let mut rows = Vec::with_capacity(config.reps * config.methods.len());
    for r in per_rep {
        rows.extend(r?);
    }
    let aggregates = aggregate_rows(&rows, &config.methods);
    Ok(ExperimentResult { config: config.clone(), rows, aggregates })
}

/// Path of the aggregates file written next to `path`.
pub fn aggregates_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_aggregates.{}", ext.to_string_lossy()),
        None => format!("{stem}_aggregates.csv"),
    };
    path.with_file_name(name)
}

const ROW_HEADER: [&str; 6] = ["method", "rep", "seed", "error", "seconds", "params_json"];
const AGG_HEADER: [&str; 6] = ["method", "mean_error", "sd_error", "mean_seconds", "sd_seconds", "reps_used"];

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

/// Per-replication rows as CSV.
pub fn write_rows<W: Write>(rows: &[RepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROW_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.error.map(|e| e.to_string()).unwrap_or_default(),
            r.seconds.to_string(),
            r.params.map(|p| p.to_json()).unwrap_or_else(|| "null".into()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregates as CSV.
pub fn write_aggregates<W: Write>(aggregates: &[MethodAggregate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGG_HEADER)?;
    for a in aggregates {
        w.write_record([
            a.method.name().to_string(),
            a.mean_error.to_string(),
            a.sd_error.to_string(),
            a.mean_seconds.to_string(),
            a.sd_seconds.to_string(),
            a.reps_used.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the per-replication rows to `path` and the aggregates to
/// `aggregate_path`.
pub fn write_results_csv_to(result: &ExperimentResult, path: &Path, aggregate_path: &Path) -> Result<()> {
    write_rows(&result.rows, create(path)?)?;
    write_aggregates(&result.aggregates, create(aggregate_path)?)
}

/// Writes rows to `path` and aggregates to [`aggregates_path`]`(path)`.
pub fn write_results_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_results_csv_to(result, path, &aggregates_path(path))
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse(format!("bad {what} field {field:?}")))
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {found:?}")));
    }
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<RepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    check_header(r.headers()?, &ROW_HEADER)?;
    let mut rows = vec![];
    for rec in r.records() {
        let rec = rec?;
        let error = match &rec[3] {
            "" => None,
            s => Some(parse(s, "error")?),
        };
        rows.push(RepRow {
            method: parse(&rec[0], "method")?,
            rep: parse(&rec[1], "rep")?,
            seed: parse(&rec[2], "seed")?,
            error,
            seconds: parse(&rec[4], "seconds")?,
            params: serde_json::from_str(&rec[5])?,
        });
    }
    Ok(rows)
}

pub fn read_aggregates_csv(path: &Path) -> Result<Vec<MethodAggregate>> {
    let mut r = csv::Reader::from_path(path)?;
    check_header(r.headers()?, &AGG_HEADER)?;
    let mut out = vec![];
    for rec in r.records() {
        let rec = rec?;
        let reps_used: usize = parse(&rec[5], "reps_used")?;
        out.push(MethodAggregate {
            method: parse(&rec[0], "method")?,
            mean_error: parse(&rec[1], "mean_error")?,
            sd_error: parse(&rec[2], "sd_error")?,
            mean_seconds: parse(&rec[3], "mean_seconds")?,
            sd_seconds: parse(&rec[4], "sd_seconds")?,
            reps_used,
            sd_defined: reps_used >= 2,
        });
    }
    Ok(out)
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s;
        while e + 1 < idx.len() && x[idx[e + 1]] == x[idx[s]] {
            e += 1;
        }
        let avg = (s + e) as f64 / 2.0 + 1.0;
        for &i in &idx[s..=e] {
            r[i] = avg;
        }
        s = e + 1;
    }
    r
}

/// Spearman rank correlation; NaN when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub method: Method,
    /// Total training sizes, increasing; each class gets `⌊n/K⌋` draws.
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    #[serde(default = "default_mc")]
    pub mc_samples: usize,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default)]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub p: usize,
    /// Mean of `R_T/R_OPT − 1` over usable replications.
    pub mean_ratio: f64,
    pub sd_ratio: f64,
    pub mean_r_t: f64,
    pub mean_r_opt: f64,
    pub reps_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub method: Method,
    pub points: Vec<ConvergencePoint>,
    /// Spearman correlation of `mean_ratio` against `n`.
    pub spearman: f64,
}

/// `R_T/R_OPT − 1` against the training size. `model_for(n)` gives the
/// population at size `n`, so the dimension may grow with `n`. Both error
/// rates come from one shared Monte Carlo sample per replication.
pub fn convergence_experiment(
    config: &ConvergenceConfig,
    model_for: impl Fn(usize) -> Result<PopulationModel> + Sync,
    workers: usize,
) -> Result<ConvergenceTable> {
    if config.reps == 0 || config.n_grid.is_empty() {
        return Err(Error::InvalidParameter("need at least one replication and one sample size".into()));
    }
    if config.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n grid must be increasing".into()));
    }
    let models: Vec<Arc<PopulationModel>> = config.n_grid.iter().map(|&n| model_for(n).map(Arc::new)).collect::<Result<_>>()?;
    for (&n, m) in config.n_grid.iter().zip(&models) {
        if n / m.k() < config.cv_folds {
            return Err(Error::InvalidParameter(format!("n = {n} leaves fewer than {} observations per class", config.cv_folds)));
        }
    }
    let tasks: Vec<(usize, usize)> = (0..config.n_grid.len()).flat_map(|g| (0..config.reps).map(move |r| (g, r))).collect();
    let run = |&(g, rep): &(usize, usize)| -> Result<Option<(f64, f64)>> {
        let truth = &models[g];
        let mut rng = rng_stream(config.master_seed, ((g as u64) << 32) | rep as u64);
        let train = sample_dataset(truth, config.n_grid[g] / truth.k(), &mut rng);
        let folds = stratified_folds(&train.labels, config.cv_folds, &mut rng)?;
        let opt = ClassifierModel::opt(truth.clone());
        let fitted = match config.method {
            Method::Opt => opt.clone(),
            m => match tune_and_fit(m, &train, &folds, || match &config.grid {
                Some(g) => Ok(g.clone()),
                None => Grid::for_data(m, &train),
            }) {
                Ok(f) => f,
                Err(_) => return Ok(None),
            },
        };
        let pe = paired_conditional_errors(&[&fitted, &opt], truth, config.mc_samples, &mut rng)?;
        Ok(Some((pe.estimate(0).estimate, pe.estimate(1).estimate)))
    };
    let results: Vec<Result<Option<(f64, f64)>>> = pool(workers)?.install(|| tasks.par_iter().map(run).collect());
    let results: Vec<Option<(f64, f64)>> = results.into_iter().collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(config.n_grid.len());
    for (g, &n) in config.n_grid.iter().enumerate() {
        let usable: Vec<(f64, f64)> = results[g * config.reps..(g + 1) * config.reps].iter().flatten().copied().filter(|&(_, ro)| ro > 0.0).collect();
        let ratios: Vec<f64> = usable.iter().map(|&(rt, ro)| rt / ro - 1.0).collect();
        let (mean_ratio, sd_ratio, _) = mean_sd(&ratios);
        let (mean_r_t, _, _) = mean_sd(&usable.iter().map(|u| u.0).collect::<Vec<_>>());
        let (mean_r_opt, _, _) = mean_sd(&usable.iter().map(|u| u.1).collect::<Vec<_>>());
        points.push(ConvergencePoint { n, p: models[g].p(), mean_ratio, sd_ratio, mean_r_t, mean_r_opt, reps_used: usable.len() });
    }
    let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ms: Vec<f64> = points.iter().map(|p| p.mean_ratio).collect();
    Ok(ConvergenceTable { method: config.method, spearman: spearman(&ns, &ms), points })
}
