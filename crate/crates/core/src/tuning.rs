//! Stratified k-fold cross-validation over tuning grids.

use serde::{Deserialize, Serialize};

use crate::classifiers::{evaluate, fit, nsc_stats, slda_centers, ClassifierModel, LpdRule, Method, NscRule, Params};
use crate::error::{Error, Result};
use crate::estimators::{corrected_cov, fit_stats, lpd_directions_with, threshold_cov, threshold_deltas};
use crate::numerics::{default_pinv_tol, dot, inverse_spectrum, sym_eigen, Mat, RngStream, SymEigen};
use crate::population::{argmin, LabeledSample};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_NSC_POINTS: usize = 30;

/// `0.2, 0.25, …, 0.7`.
pub fn default_lambdas() -> Vec<f64> {
    (0..=10).map(|i| (20 + 5 * i) as f64 / 100.0).collect()
}

fn powers_of_ten(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 10f64.powi(e)).collect()
}

pub fn default_m1s() -> Vec<f64> {
    powers_of_ten(-5, 0)
}

pub fn default_m2s() -> Vec<f64> {
    powers_of_ten(-7, 0)
}

pub fn default_epsilons() -> Vec<f64> {
    powers_of_ten(-5, -1)
}

/// Candidate values for one method. Only the lists relevant to the method
/// are used; combinations are enumerated with `M₁` outermost, then `M₂`,
/// then `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub method: Method,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub m1s: Vec<f64>,
    #[serde(default)]
    pub m2s: Vec<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub deltas: Vec<f64>,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

impl Grid {
    fn empty(method: Method) -> Self {
        Grid { method, lambdas: vec![], m1s: vec![], m2s: vec![], epsilons: vec![], alpha: DEFAULT_ALPHA, deltas: vec![] }
    }

    /// Default grid for a method. NSC needs data; see [`Grid::nsc_for`].
    pub fn default_for(method: Method) -> Result<Self> {
        let mut g = Grid::empty(method);
        match method {
            Method::Lpd => g.lambdas = default_lambdas(),
            Method::Slda1 => {
                g.m1s = default_m1s();
                g.m2s = default_m2s();
            }
            Method::Slda2 => {
                g.m1s = default_m1s();
                g.m2s = default_m2s();
                g.epsilons = default_epsilons();
            }
            Method::Nsc => return Err(Error::InvalidParameter("the NSC grid depends on the training data".into())),
            Method::Opt | Method::Glda => {
                return Err(Error::InvalidParameter(format!("{method} has no tuning parameters")));
            }
        }
        Ok(g)
    }

    /// `points` equally spaced thresholds from 0 to `max |d_ik|`.
    pub fn nsc_for(data: &LabeledSample, points: usize) -> Result<Self> {
        let max = nsc_stats(data)?.max_abs_d();
        let mut g = Grid::empty(Method::Nsc);
        g.deltas = if points <= 1 { vec![0.0] } else { (0..points).map(|i| max * i as f64 / (points - 1) as f64).collect() };
        Ok(g)
    }

    /// The default grid, built from `data` where needed.
    pub fn for_data(method: Method, data: &LabeledSample) -> Result<Self> {
        if method == Method::Nsc {
            Grid::nsc_for(data, DEFAULT_NSC_POINTS)
        } else {
            Grid::default_for(method)
        }
    }

    /// Grid holding exactly one combination.
    pub fn single(method: Method, params: &Params) -> Self {
        let mut g = Grid::empty(method);
        g.lambdas.extend(params.lambda);
        g.m1s.extend(params.m1);
        g.m2s.extend(params.m2);
        g.epsilons.extend(params.epsilon);
        g.deltas.extend(params.delta);
        if let Some(a) = params.alpha {
            g.alpha = a;
        }
        g
    }

    /// Combinations in iteration order.
    pub fn combos(&self) -> Vec<Params> {
        match self.method {
            Method::Lpd => self.lambdas.iter().map(|&l| Params::lpd(l)).collect(),
            Method::Nsc => self.deltas.iter().map(|&d| Params::nsc(d)).collect(),
            Method::Slda1 => self.m1s.iter().flat_map(|&m1| self.m2s.iter().map(move |&m2| Params::slda1(m1, m2, self.alpha))).collect(),
            Method::Slda2 => self
                .m1s
                .iter()
                .flat_map(|&m1| self.m2s.iter().flat_map(move |&m2| self.epsilons.iter().map(move |&e| Params::slda2(m1, m2, self.alpha, e))))
                .collect(),
            Method::Opt | Method::Glda => vec![Params::default()],
        }
    }

    fn validate(&self) -> Result<()> {
        let combos = self.combos();
        if combos.is_empty() {
            return Err(Error::InvalidParameter(format!("empty tuning grid for {}", self.method)));
        }
        let all: Vec<f64> = [&self.lambdas, &self.m1s, &self.m2s, &self.epsilons].into_iter().flatten().copied().collect();
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidParameter("grid values must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Fold index (0-based) per observation: within each class the indices are
/// shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[usize], folds: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    let k = labels.iter().copied().max().unwrap_or(0);
    let mut out = vec![0; labels.len()];
    for class in 1..=k {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == class).collect();
        if idx.len() < folds {
            return Err(Error::ClassTooSmall { class, count: idx.len(), folds });
        }
        rng.shuffle(&mut idx);
        for (t, &r) in idx.iter().enumerate() {
            out[r] = t % folds;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvEntry {
    pub params: Params,
    /// Mean validation error over folds, `None` when some fold failed to fit.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub method: Method,
    pub best_params: Params,
    pub best_error: f64,
    pub table: Vec<CvEntry>,
    pub fold_assignments: Vec<usize>,
}

pub fn grid_search(method: Method, data: &LabeledSample, grid: &Grid, folds: usize, rng: &mut RngStream) -> Result<CvResult> {
    let assignment = stratified_folds(&data.labels, folds, rng)?;
    grid_search_with_folds(method, data, grid, &assignment)
}

/// Cross-validation on a fixed fold assignment.
pub fn grid_search_with_folds(method: Method, data: &LabeledSample, grid: &Grid, assignment: &[usize]) -> Result<CvResult> {
    if grid.method != method {
        return Err(Error::InvalidParameter(format!("grid is for {}, not {method}", grid.method)));
    }
    grid.validate()?;
    if assignment.len() != data.n() {
        return Err(Error::DimensionMismatch { expected: data.n(), got: assignment.len() });
    }
    let combos = grid.combos();
    let folds = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut sums: Vec<Option<f64>> = vec![Some(0.0); combos.len()];
    for f in 0..folds {
        let train_rows: Vec<usize> = (0..data.n()).filter(|&r| assignment[r] != f).collect();
        let valid_rows: Vec<usize> = (0..data.n()).filter(|&r| assignment[r] == f).collect();
        if valid_rows.is_empty() {
            continue;
        }
        let train = data.subset(&train_rows);
        let valid = data.subset(&valid_rows);
        let errs = fold_errors(method, grid, &combos, &train, &valid);
        for (s, e) in sums.iter_mut().zip(errs) {
            *s = match (*s, e) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
    }
    let table: Vec<CvEntry> = combos.iter().zip(&sums).map(|(p, s)| CvEntry { params: *p, error: s.map(|v| v / folds as f64) }).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in table.iter().enumerate() {
        if let Some(v) = e.error {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    let (bi, be) = best.ok_or(Error::AllCombosInvalid)?;
    Ok(CvResult { method, best_params: table[bi].params, best_error: be, table, fold_assignments: assignment.to_vec() })
}

fn error_of(model: &ClassifierModel, valid: &LabeledSample) -> Option<f64> {
    evaluate(model, valid).ok().map(|r| r.error_rate)
}

/// Validation error of every combination on one fold.
fn fold_errors(method: Method, grid: &Grid, combos: &[Params], train: &LabeledSample, valid: &LabeledSample) -> Vec<Option<f64>> {
    match method {
        Method::Lpd => {
            let Ok(stats) = fit_stats(train) else { return vec![None; combos.len()] };
            let Ok(sigma_bar) = corrected_cov(&stats) else { return vec![None; combos.len()] };
            combos
                .iter()
                .map(|p| {
                    let lambda = p.lambda?;
                    let dirs = lpd_directions_with(&stats, &sigma_bar, lambda).ok()?;
                    if !dirs.all_feasible() {
                        return None;
                    }
                    let m = ClassifierModel::Lpd(LpdRule::new(dirs.betas_to_1, stats.class_means.clone(), lambda));
                    error_of(&m, valid)
                })
                .collect()
        }
        Method::Nsc => {
            let Ok(stats) = nsc_stats(train) else { return vec![None; combos.len()] };
            combos.iter().map(|p| error_of(&ClassifierModel::Nsc(NscRule::from_stats(&stats, p.delta?)), valid)).collect()
        }
        Method::Slda1 | Method::Slda2 => slda_fold_errors(method, grid, train, valid).unwrap_or_else(|| vec![None; combos.len()]),
        _ => combos.iter().map(|p| fit(method, train, p).ok().and_then(|m| error_of(&m, valid))).collect(),
    }
}

/// SLDA validation errors for the whole grid on one fold.
///
/// One eigendecomposition of `Σ̃` per `M₁` serves every `(M₂, ε)`: in the
/// eigenbasis the class scores are `Σ_k w_k (c̃_ik² − 2 c̃_ik y_k)` with
/// `w` the inverted spectrum, `c̃` the projected centers and `y` the
/// projected validation point.
fn slda_fold_errors(method: Method, grid: &Grid, train: &LabeledSample, valid: &LabeledSample) -> Option<Vec<Option<f64>>> {
    let stats = fit_stats(train).ok()?;
    let tol = default_pinv_tol(stats.p);
    let shifts: Vec<f64> = if method == Method::Slda2 { grid.epsilons.clone() } else { vec![0.0] };
    let per_m1 = grid.m2s.len() * shifts.len();
    let mut out = Vec::with_capacity(grid.m1s.len() * per_m1);
    let mut cache: Option<(Mat, SymEigen, Mat)> = None;
    for &m1 in &grid.m1s {
        let Ok(tc) = threshold_cov(&stats, m1) else {
            out.extend(std::iter::repeat_n(None, per_m1));
            continue;
        };
        let reuse = matches!(&cache, Some((s, _, _)) if *s == tc.sigma_tilde);
        if !reuse {
            match sym_eigen(&tc.sigma_tilde) {
                Ok(eig) => {
                    let y = project(&eig, &valid.x);
                    cache = Some((tc.sigma_tilde, eig, y));
                }
                Err(_) => {
                    cache = None;
                    out.extend(std::iter::repeat_n(None, per_m1));
                    continue;
                }
            }
        }
        let (_, eig, y) = cache.as_ref().unwrap();
        for &m2 in &grid.m2s {
            let Ok(td) = threshold_deltas(&stats, m2, grid.alpha) else {
                out.extend(std::iter::repeat_n(None, shifts.len()));
                continue;
            };
            let ct = project(eig, &slda_centers(&stats, &td.deltas_to_1));
            for &shift in &shifts {
                let w = inverse_spectrum(&eig.values, shift, tol);
                out.push(Some(spectral_error(&w, &ct, y, &valid.labels)));
            }
        }
    }
    Some(out)
}

/// Rows of `x` expressed in the eigenbasis.
fn project(eig: &SymEigen, x: &Mat) -> Mat {
    let vt = eig.vectors.transpose();
    Mat::from_fn(x.rows(), vt.rows(), |r, k| dot(vt.row(k), x.row(r)))
}

fn spectral_error(w: &[f64], centers: &Mat, y: &Mat, labels: &[usize]) -> f64 {
    let k = centers.rows();
    let a: Mat = Mat::from_fn(k, w.len(), |i, c| w[c] * centers[(i, c)]);
    let c: Vec<f64> = (0..k).map(|i| dot(a.row(i), centers.row(i))).collect();
    let mut wrong = 0;
    let mut s = vec![0.0; k];
    for (r, &l) in labels.iter().enumerate() {
        for i in 0..k {
            s[i] = c[i] - 2.0 * dot(a.row(i), y.row(r));
        }
        if argmin(&s) + 1 != l {
            wrong += 1;
        }
    }
    wrong as f64 / labels.len() as f64
}
