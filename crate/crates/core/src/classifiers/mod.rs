//! Fitted discriminant rules, prediction, evaluation and conditional error.
//!
//! Every rule here is linear in `x`: prediction projects `x` onto `K`
//! directions and then either takes an argmin over class scores or runs the
//! pairwise tournament used by the LP discriminant.

pub mod nsc;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit_stats, lpd_directions, threshold_cov, threshold_deltas, FittedStats};
use crate::numerics::{add_vec, default_pinv_tol, dot, pinv, pinv_from_eigen, sub_vec, sym_eigen, Mat, RngStream};
use crate::population::{argmin, stratified_draws, LabeledSample, PopulationModel, PopulationSpec};

pub use nsc::{nsc_stats, NscStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Opt,
    Glda,
    Slda1,
    Slda2,
    Lpd,
    Nsc,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Opt, Method::Glda, Method::Slda1, Method::Slda2, Method::Lpd, Method::Nsc];

    pub fn name(self) -> &'static str {
        match self {
            Method::Opt => "opt",
            Method::Glda => "glda",
            Method::Slda1 => "slda1",
            Method::Slda2 => "slda2",
            Method::Lpd => "lpd",
            Method::Nsc => "nsc",
        }
    }

    pub fn is_tunable(self) -> bool {
        matches!(self, Method::Slda1 | Method::Slda2 | Method::Lpd | Method::Nsc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Tuning values; each method reads the fields it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
}

impl Params {
    pub fn lpd(lambda: f64) -> Self {
        Params { lambda: Some(lambda), ..Default::default() }
    }

    pub fn slda1(m1: f64, m2: f64, alpha: f64) -> Self {
        Params { m1: Some(m1), m2: Some(m2), alpha: Some(alpha), ..Default::default() }
    }

    pub fn slda2(m1: f64, m2: f64, alpha: f64, epsilon: f64) -> Self {
        Params { epsilon: Some(epsilon), ..Params::slda1(m1, m2, alpha) }
    }

    pub fn nsc(delta: f64) -> Self {
        Params { delta: Some(delta), ..Default::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("params serialize")
    }
}

fn need(v: Option<f64>, name: &str, method: Method) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParameter(format!("{method} requires parameter '{name}'")))
}

/// Rule `argmin_i (c_i − 2 w_iᵀx)`, the expansion of a quadratic distance
/// with the shared `xᵀΩx` term dropped.
#[derive(Debug, Clone, PartialEq)]
struct LinearScores {
    w: Mat,
    c: Vec<f64>,
}

impl LinearScores {
    fn from_centers(centers: &Mat, omega: &Mat) -> Self {
        let k = centers.rows();
        let mut w = Mat::zeros(k, centers.cols());
        let mut c = vec![0.0; k];
        for i in 0..k {
            let wi = omega.matvec(centers.row(i));
            c[i] = dot(centers.row(i), &wi);
            w.row_mut(i).copy_from_slice(&wi);
        }
        LinearScores { w, c }
    }

    fn scores(&self, x: &[f64]) -> Vec<f64> {
        (0..self.c.len()).map(|i| self.c[i] - 2.0 * dot(self.w.row(i), x)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct OptRule {
    pub population: Arc<PopulationModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GldaRule {
    pub class_means: Mat,
    pub omega: Mat,
    lin: LinearScores,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SldaVariant {
    /// Pseudoinverse of the thresholded covariance.
    Pinv,
    /// Inverse of the thresholded covariance plus `εI`.
    Ridge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SldaRule {
    /// `c_i = x̄₁ + δ̃_{i1}`.
    pub centers: Mat,
    pub omega: Mat,
    pub variant: SldaVariant,
    pub epsilon: f64,
    pub params: Params,
    lin: LinearScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpdRule {
    /// Row `j` is `β̂_{j1}`; row 1 is zero.
    pub betas_to_1: Mat,
    pub class_means: Mat,
    pub lambda: f64,
    /// `o_ji = β̂_{ji}ᵀ(x̄_j + x̄_i)/2`, antisymmetric.
    offsets: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NscRule {
    pub centroids: Mat,
    pub overall: Vec<f64>,
    pub s: Vec<f64>,
    pub s0: f64,
    pub priors: Vec<f64>,
    pub delta: f64,
    lin: LinearScores,
}

/// A fitted classification rule.
#[derive(Debug, Clone)]
pub enum ClassifierModel {
    Opt(OptRule),
    Glda(GldaRule),
    Slda(SldaRule),
    Lpd(LpdRule),
    Nsc(NscRule),
}

impl GldaRule {
    pub fn new(class_means: Mat, omega: Mat) -> Self {
        let lin = LinearScores::from_centers(&class_means, &omega);
        GldaRule { class_means, omega, lin }
    }
}

impl SldaRule {
    pub fn new(centers: Mat, omega: Mat, variant: SldaVariant, epsilon: f64, params: Params) -> Self {
        let lin = LinearScores::from_centers(&centers, &omega);
        SldaRule { centers, omega, variant, epsilon, params, lin }
    }

    /// `δ̃_{ji} = c_j − c_i` (1-based).
    pub fn delta(&self, j: usize, i: usize) -> Vec<f64> {
        sub_vec(self.centers.row(j - 1), self.centers.row(i - 1))
    }

    /// `b̃_{ji} = (c_j + c_i)/2`.
    pub fn midpoint(&self, j: usize, i: usize) -> Vec<f64> {
        add_vec(self.centers.row(j - 1), self.centers.row(i - 1)).into_iter().map(|v| 0.5 * v).collect()
    }
}

impl LpdRule {
    pub fn new(betas_to_1: Mat, class_means: Mat, lambda: f64) -> Self {
        let k = betas_to_1.rows();
        let mut offsets = Mat::zeros(k, k);
        for j in 0..k {
            for i in 0..j {
                let beta = sub_vec(betas_to_1.row(j), betas_to_1.row(i));
                let mid: Vec<f64> = add_vec(class_means.row(j), class_means.row(i)).into_iter().map(|v| 0.5 * v).collect();
                let o = dot(&beta, &mid);
                offsets[(j, i)] = o;
                offsets[(i, j)] = -o;
            }
        }
        LpdRule { betas_to_1, class_means, lambda, offsets }
    }

    /// `β̂_{ji} = β̂_{j1} − β̂_{i1}` (1-based).
    pub fn beta(&self, j: usize, i: usize) -> Vec<f64> {
        sub_vec(self.betas_to_1.row(j - 1), self.betas_to_1.row(i - 1))
    }

    fn projections(&self, x: &[f64]) -> Vec<f64> {
        (0..self.betas_to_1.rows()).map(|j| dot(self.betas_to_1.row(j), x)).collect()
    }

    /// Matrix with entry `(j, i)` equal to `s_{ji}(x)` (0-based indices).
    pub fn pairwise_scores(&self, x: &[f64]) -> Mat {
        let u = self.projections(x);
        let k = u.len();
        Mat::from_fn(k, k, |j, i| if i == j { 0.0 } else { (u[j] - u[i]) - self.offsets[(j, i)] })
    }

    fn decide(&self, u: &[f64]) -> usize {
        let k = u.len();
        let mut best = 0usize;
        let mut best_wins = 0usize;
        let mut best_sum = f64::INFINITY;
        for i in 0..k {
            let mut wins = 0;
            let mut sum = 0.0;
            for j in 0..k {
                if j != i {
                    let s = (u[j] - u[i]) - self.offsets[(j, i)];
                    if s < 0.0 {
                        wins += 1;
                    }
                    sum += s;
                }
            }
            if wins == k - 1 {
                return i;
            }
            if i == 0 || wins > best_wins || (wins == best_wins && sum < best_sum) {
                best = i;
                best_wins = wins;
                best_sum = sum;
            }
        }
        best
    }
}

impl NscRule {
    pub fn from_stats(stats: &NscStats, delta: f64) -> Self {
        Self::new(stats.centroids(delta), stats.overall.clone(), stats.s.clone(), stats.s0, stats.priors(), delta)
    }

    pub fn new(centroids: Mat, overall: Vec<f64>, s: Vec<f64>, s0: f64, priors: Vec<f64>, delta: f64) -> Self {
        let (k, p) = (centroids.rows(), centroids.cols());
        let inv_var: Vec<f64> = s
            .iter()
            .map(|&sk| {
                let d = sk + s0;
                if d > 0.0 {
                    1.0 / (d * d)
                } else {
                    0.0
                }
            })
            .collect();
        let mut w = Mat::zeros(k, p);
        let mut c = vec![0.0; k];
        for i in 0..k {
            let mut ci = 0.0;
            for f in 0..p {
                let v = centroids[(i, f)] * inv_var[f];
                w[(i, f)] = v;
                ci += centroids[(i, f)] * v;
            }
            c[i] = ci - 2.0 * priors[i].ln();
        }
        NscRule { centroids, overall, s, s0, priors, delta, lin: LinearScores { w, c } }
    }
}

impl ClassifierModel {
    pub fn opt(population: Arc<PopulationModel>) -> Self {
        ClassifierModel::Opt(OptRule { population })
    }

    pub fn method(&self) -> Method {
        match self {
            ClassifierModel::Opt(_) => Method::Opt,
            ClassifierModel::Glda(_) => Method::Glda,
            ClassifierModel::Slda(r) if r.variant == SldaVariant::Pinv => Method::Slda1,
            ClassifierModel::Slda(_) => Method::Slda2,
            ClassifierModel::Lpd(_) => Method::Lpd,
            ClassifierModel::Nsc(_) => Method::Nsc,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            ClassifierModel::Opt(r) => r.population.k(),
            ClassifierModel::Glda(r) => r.class_means.rows(),
            ClassifierModel::Slda(r) => r.centers.rows(),
            ClassifierModel::Lpd(r) => r.class_means.rows(),
            ClassifierModel::Nsc(r) => r.centroids.rows(),
        }
    }

    pub fn p(&self) -> usize {
        match self {
            ClassifierModel::Opt(r) => r.population.p(),
            ClassifierModel::Glda(r) => r.class_means.cols(),
            ClassifierModel::Slda(r) => r.centers.cols(),
            ClassifierModel::Lpd(r) => r.class_means.cols(),
            ClassifierModel::Nsc(r) => r.centroids.cols(),
        }
    }

    /// Tuning values the model was fitted with.
    pub fn params(&self) -> Params {
        match self {
            ClassifierModel::Slda(r) => r.params,
            ClassifierModel::Lpd(r) => Params::lpd(r.lambda),
            ClassifierModel::Nsc(r) => Params::nsc(r.delta),
            _ => Params::default(),
        }
    }

    /// Predicted class in `1..=K`.
    pub fn predict(&self, x: &[f64]) -> usize {
        assert_eq!(x.len(), self.p(), "predict: feature count mismatch");
        1 + match self {
            ClassifierModel::Opt(r) => {
                let (w, c) = r.population.opt_linear();
                let s: Vec<f64> = (0..c.len()).map(|i| c[i] - 2.0 * dot(w.row(i), x)).collect();
                argmin(&s)
            }
            ClassifierModel::Glda(r) => argmin(&r.lin.scores(x)),
            ClassifierModel::Slda(r) => argmin(&r.lin.scores(x)),
            ClassifierModel::Nsc(r) => argmin(&r.lin.scores(x)),
            ClassifierModel::Lpd(r) => r.decide(&r.projections(x)),
        }
    }

    pub fn predict_all(&self, x: &Mat) -> Vec<usize> {
        (0..x.rows()).map(|r| self.predict(x.row(r))).collect()
    }

    /// Quadratic class scores `(x − center_i)ᵀΩ(x − center_i)` for the
    /// centroid-type rules; `None` for the LP tournament.
    pub fn quadratic_scores(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (centers, omega): (&Mat, &Mat) = match self {
            ClassifierModel::Opt(r) => (r.population.means(), r.population.sigma_inv()),
            ClassifierModel::Glda(r) => (&r.class_means, &r.omega),
            ClassifierModel::Slda(r) => (&r.centers, &r.omega),
            _ => return None,
        };
        Some((0..centers.rows()).map(|i| omega.quad_form(&sub_vec(x, centers.row(i)))).collect())
    }
}

/// Fits a data-driven rule. The optimal rule is built with
/// [`ClassifierModel::opt`] instead.
pub fn fit(method: Method, data: &LabeledSample, params: &Params) -> Result<ClassifierModel> {
    match method {
        Method::Opt => Err(Error::InvalidParameter("the optimal rule is built from a population, not data".into())),
        Method::Glda => {
            let stats = fit_stats(data)?;
            let omega = pinv(&stats.pooled_cov, default_pinv_tol(stats.p))?;
            Ok(ClassifierModel::Glda(GldaRule::new(stats.class_means, omega)))
        }
        Method::Slda1 | Method::Slda2 => {
            let stats = fit_stats(data)?;
            fit_slda(&stats, method, params)
        }
        Method::Lpd => {
            let lambda = need(params.lambda, "lambda", method)?;
            let stats = fit_stats(data)?;
            let dirs = lpd_directions(&stats, lambda)?;
            if let Some(j) = dirs.feasible_flags.iter().position(|f| !f) {
                return Err(Error::LpInfeasible(j + 1));
            }
            Ok(ClassifierModel::Lpd(LpdRule::new(dirs.betas_to_1, stats.class_means, lambda)))
        }
        Method::Nsc => {
            let delta = need(params.delta, "delta", method)?;
            let stats = nsc_stats(data)?;
            Ok(ClassifierModel::Nsc(NscRule::from_stats(&stats, delta)))
        }
    }
}

/// Centers `x̄₁ + δ̃_{i1}`.
pub(crate) fn slda_centers(stats: &FittedStats, deltas_to_1: &Mat) -> Mat {
    let mut centers = Mat::zeros(stats.k, stats.p);
    for i in 0..stats.k {
        let c = add_vec(stats.class_means.row(0), deltas_to_1.row(i));
        centers.row_mut(i).copy_from_slice(&c);
    }
    // δ̃₁₁ = 0, so the first center is x̄₁ exactly.
    centers.row_mut(0).copy_from_slice(stats.class_means.row(0));
    centers
}

pub(crate) fn slda_shift(method: Method, params: &Params) -> Result<f64> {
    Ok(if method == Method::Slda2 { need(params.epsilon, "epsilon", method)? } else { 0.0 })
}

fn fit_slda(stats: &FittedStats, method: Method, params: &Params) -> Result<ClassifierModel> {
    let m1 = need(params.m1, "m1", method)?;
    let m2 = need(params.m2, "m2", method)?;
    let alpha = need(params.alpha, "alpha", method)?;
    let shift = slda_shift(method, params)?;
    if method == Method::Slda2 && !(shift > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {shift}")));
    }
    let tc = threshold_cov(stats, m1)?;
    let td = threshold_deltas(stats, m2, alpha)?;
    let eig = sym_eigen(&tc.sigma_tilde)?;
    let omega = pinv_from_eigen(&eig, shift, default_pinv_tol(stats.p));
    let variant = if method == Method::Slda1 { SldaVariant::Pinv } else { SldaVariant::Ridge };
    let mut p = Params::slda1(m1, m2, alpha);
    if method == Method::Slda2 {
        p.epsilon = Some(shift);
    }
    Ok(ClassifierModel::Slda(SldaRule::new(slda_centers(stats, &td.deltas_to_1), omega, variant, shift, p)))
}

/// Test-set performance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub error_rate: f64,
    /// Misclassification rate within each true class (NaN for absent classes).
    pub per_class_errors: Vec<f64>,
    /// `confusion[true − 1][predicted − 1]`.
    pub confusion: Vec<Vec<usize>>,
}

pub fn evaluate(model: &ClassifierModel, test: &LabeledSample) -> Result<EvalReport> {
    if test.n() == 0 {
        return Err(Error::InvalidParameter("empty test set".into()));
    }
    if test.p() != model.p() {
        return Err(Error::DimensionMismatch { expected: model.p(), got: test.p() });
    }
    let k = model.k().max(test.k);
    let mut confusion = vec![vec![0usize; k]; k];
    for (r, &l) in test.labels.iter().enumerate() {
        confusion[l - 1][model.predict(test.x.row(r)) - 1] += 1;
    }
    Ok(report_from_confusion(confusion))
}

fn report_from_confusion(confusion: Vec<Vec<usize>>) -> EvalReport {
    let total: usize = confusion.iter().flatten().sum();
    let correct: usize = (0..confusion.len()).map(|i| confusion[i][i]).sum();
    let per_class_errors = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let n: usize = row.iter().sum();
            if n == 0 {
                f64::NAN
            } else {
                (n - row[i]) as f64 / n as f64
            }
        })
        .collect();
    EvalReport { error_rate: (total - correct) as f64 / total as f64, per_class_errors, confusion }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Error rates of several rules on one shared Monte Carlo sample, so that
/// differences between them have small variance.
#[derive(Debug, Clone)]
pub struct PairedErrors {
    pub samples: usize,
    wrong: Vec<Vec<bool>>,
}

impl PairedErrors {
    pub fn estimate(&self, m: usize) -> McEstimate {
        let r = self.wrong[m].iter().filter(|&&w| w).count() as f64 / self.samples as f64;
        McEstimate { estimate: r, std_error: (r * (1.0 - r) / self.samples as f64).sqrt() }
    }

    /// Estimate of `R_a − R_b` and its paired standard error.
    pub fn gap(&self, a: usize, b: usize) -> McEstimate {
        let n = self.samples as f64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for (&x, &y) in self.wrong[a].iter().zip(&self.wrong[b]) {
            let d = x as i32 as f64 - y as i32 as f64;
            s1 += d;
            s2 += d * d;
        }
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0);
        McEstimate { estimate: mean, std_error: (var / n).sqrt() }
    }
}

pub fn paired_conditional_errors(
    models: &[&ClassifierModel],
    truth: &PopulationModel,
    mc_samples: usize,
    rng: &mut RngStream,
) -> Result<PairedErrors> {
    if mc_samples < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 Monte Carlo samples, got {mc_samples}")));
    }
    if let Some(m) = models.iter().find(|m| m.p() != truth.p()) {
        return Err(Error::DimensionMismatch { expected: truth.p(), got: m.p() });
    }
    let mut wrong = vec![Vec::with_capacity(mc_samples); models.len()];
    let mut samples = 0;
    stratified_draws(truth, mc_samples, rng, |label, x| {
        samples += 1;
        for (w, m) in wrong.iter_mut().zip(models) {
            w.push(m.predict(x) != label);
        }
    });
    Ok(PairedErrors { samples, wrong })
}

/// Conditional misclassification rate of a fitted rule under `truth`.
pub fn conditional_error(model: &ClassifierModel, truth: &PopulationModel, mc_samples: usize, rng: &mut RngStream) -> Result<McEstimate> {
    Ok(paired_conditional_errors(&[model], truth, mc_samples, rng)?.estimate(0))
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// On-disk model representation.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    method: Method,
    k: usize,
    p: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    population: Option<PopulationSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    class_means: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    omega: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    centers: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    betas_to_1: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    centroids: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    overall: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    s0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    priors: Option<Vec<f64>>,
    params: Params,
}

fn field<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parse(format!("model file is missing '{name}'")))
}

fn mat_field(v: Option<Vec<Vec<f64>>>, name: &str, rows: usize, cols: usize) -> Result<Mat> {
    let m = Mat::from_rows(&field(v, name)?)?;
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::Parse(format!("'{name}' should be {rows}x{cols}, got {}x{}", m.rows(), m.cols())));
    }
    Ok(m)
}

fn vec_field(v: Option<Vec<f64>>, name: &str, len: usize) -> Result<Vec<f64>> {
    let v = field(v, name)?;
    if v.len() != len {
        return Err(Error::Parse(format!("'{name}' should have length {len}, got {}", v.len())));
    }
    Ok(v)
}

impl ClassifierModel {
    pub fn to_json(&self) -> String {
        let mut f = ModelFile {
            method: self.method(),
            k: self.k(),
            p: self.p(),
            population: None,
            class_means: None,
            omega: None,
            centers: None,
            epsilon: None,
            betas_to_1: None,
            centroids: None,
            overall: None,
            s: None,
            s0: None,
            priors: None,
            params: self.params(),
        };
        match self {
            ClassifierModel::Opt(r) => f.population = Some(r.population.to_spec()),
            ClassifierModel::Glda(r) => {
                f.class_means = Some(rows(&r.class_means));
                f.omega = Some(rows(&r.omega));
            }
            ClassifierModel::Slda(r) => {
                f.centers = Some(rows(&r.centers));
                f.omega = Some(rows(&r.omega));
                f.epsilon = Some(r.epsilon);
            }
            ClassifierModel::Lpd(r) => {
                f.betas_to_1 = Some(rows(&r.betas_to_1));
                f.class_means = Some(rows(&r.class_means));
            }
            ClassifierModel::Nsc(r) => {
                f.centroids = Some(rows(&r.centroids));
                f.overall = Some(r.overall.clone());
                f.s = Some(r.s.clone());
                f.s0 = Some(r.s0);
                f.priors = Some(r.priors.clone());
            }
        }
        serde_json::to_string(&f).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        let (k, p) = (f.k, f.p);
        Ok(match f.method {
            Method::Opt => {
                let pop = field(f.population, "population")?.build()?;
                if pop.k() != k || pop.p() != p {
                    return Err(Error::Parse("population does not match k/p".into()));
                }
                ClassifierModel::opt(Arc::new(pop))
            }
            Method::Glda => ClassifierModel::Glda(GldaRule::new(mat_field(f.class_means, "class_means", k, p)?, mat_field(f.omega, "omega", p, p)?)),
            Method::Slda1 | Method::Slda2 => ClassifierModel::Slda(SldaRule::new(
                mat_field(f.centers, "centers", k, p)?,
                mat_field(f.omega, "omega", p, p)?,
                if f.method == Method::Slda1 { SldaVariant::Pinv } else { SldaVariant::Ridge },
                field(f.epsilon, "epsilon")?,
                f.params,
            )),
            Method::Lpd => ClassifierModel::Lpd(LpdRule::new(
                mat_field(f.betas_to_1, "betas_to_1", k, p)?,
                mat_field(f.class_means, "class_means", k, p)?,
                field(f.params.lambda, "params.lambda")?,
            )),
            Method::Nsc => ClassifierModel::Nsc(NscRule::new(
                mat_field(f.centroids, "centroids", k, p)?,
                vec_field(f.overall, "overall", p)?,
                vec_field(f.s, "s", p)?,
                field(f.s0, "s0")?,
                vec_field(f.priors, "priors", k)?,
                field(f.params.delta, "params.delta")?,
            )),
        })
    }
}

#[cfg(test)]
mod tests;
