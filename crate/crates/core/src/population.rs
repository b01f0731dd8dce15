//! Ground-truth Gaussian populations with a shared covariance and uniform
//! priors, the optimal (Bayes) rule, and sampling.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::mat::sub_vec;
use crate::numerics::rng::mvn_transform_into;
use crate::numerics::{cholesky, cholesky_inverse, cholesky_solve, dot, std_normal_cdf, sym_eigen, Mat, RngStream, SymEigen};

/// `K` Gaussian classes `N(μ_i, Σ)` with equal priors.
#[derive(Debug)]
pub struct PopulationModel {
    k: usize,
    p: usize,
    means: Mat,
    sigma: Mat,
    chol: Mat,
    sigma_inv: Mat,
    /// Rows `Σ⁻¹μ_i`.
    opt_weights: Mat,
    /// `μ_iᵀΣ⁻¹μ_i`.
    opt_offsets: Vec<f64>,
    eigen: OnceLock<SymEigen>,
    sigma_sqrt: OnceLock<Mat>,
}

impl Clone for PopulationModel {
    fn clone(&self) -> Self {
        PopulationModel {
            k: self.k,
            p: self.p,
            means: self.means.clone(),
            sigma: self.sigma.clone(),
            chol: self.chol.clone(),
            sigma_inv: self.sigma_inv.clone(),
            opt_weights: self.opt_weights.clone(),
            opt_offsets: self.opt_offsets.clone(),
            eigen: self.eigen.clone(),
            sigma_sqrt: self.sigma_sqrt.clone(),
        }
    }
}

impl PopulationModel {
    /// Validates and builds a model. Means must be pairwise distinct.
    pub fn new(means: Mat, sigma: Mat) -> Result<Self> {
        let model = Self::new_allow_coincident(means, sigma)?;
        for i in 0..model.k {
            for j in 0..i {
                if model.means.row(i) == model.means.row(j) {
                    return Err(Error::InvalidPopulation(format!("means of classes {} and {} coincide", j + 1, i + 1)));
                }
            }
        }
        Ok(model)
    }

    /// Like [`PopulationModel::new`] but allows classes with identical means,
    /// which is useful for studying fully overlapping populations.
    pub fn new_allow_coincident(means: Mat, sigma: Mat) -> Result<Self> {
        let (k, p) = (means.rows(), means.cols());
        if k < 2 {
            return Err(Error::InvalidPopulation(format!("need K ≥ 2, got K = {k}")));
        }
        if p == 0 {
            return Err(Error::InvalidPopulation("dimension must be positive".into()));
        }
        if sigma.rows() != p || sigma.cols() != p {
            return Err(Error::DimensionMismatch { expected: p, got: sigma.rows() });
        }
        if !means.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidPopulation("non-finite means or covariance".into()));
        }
        let chol = cholesky(&sigma).map_err(|e| Error::InvalidPopulation(format!("covariance: {e}")))?;
        let sigma_inv = cholesky_inverse(&chol);
        let mut opt_weights = Mat::zeros(k, p);
        let mut opt_offsets = vec![0.0; k];
        for i in 0..k {
            let w = cholesky_solve(&chol, means.row(i));
            opt_offsets[i] = dot(means.row(i), &w);
            opt_weights.row_mut(i).copy_from_slice(&w);
        }
        Ok(PopulationModel { k, p, means, sigma, chol, sigma_inv, opt_weights, opt_offsets, eigen: OnceLock::new(), sigma_sqrt: OnceLock::new() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn means(&self) -> &Mat {
        &self.means
    }

    /// Mean of class `i` (1-based).
    pub fn mean(&self, i: usize) -> &[f64] {
        self.means.row(i - 1)
    }

    pub fn sigma(&self) -> &Mat {
        &self.sigma
    }

    pub fn chol(&self) -> &Mat {
        &self.chol
    }

    pub fn sigma_inv(&self) -> &Mat {
        &self.sigma_inv
    }

    /// Eigendecomposition of Σ, computed on first use.
    pub fn eigen(&self) -> &SymEigen {
        self.eigen.get_or_init(|| sym_eigen(&self.sigma).expect("covariance validated at construction"))
    }

    /// Symmetric square root of Σ, computed on first use.
    pub fn sigma_sqrt(&self) -> &Mat {
        self.sigma_sqrt.get_or_init(|| self.eigen().spectral_map(|l| l.max(0.0).sqrt()))
    }

    /// Solves `Σ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        cholesky_solve(&self.chol, b)
    }

    /// Squared Mahalanobis distance `(x−y)ᵀΣ⁻¹(x−y)`.
    pub fn mahalanobis_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = sub_vec(x, y);
        dot(&d, &self.solve(&d))
    }

    /// Linear form of the optimal rule: class `i` minimizes `c_i − 2 w_iᵀx`.
    pub(crate) fn opt_linear(&self) -> (&Mat, &[f64]) {
        (&self.opt_weights, &self.opt_offsets)
    }

    pub fn to_spec(&self) -> PopulationSpec {
        PopulationSpec { k: self.k, p: self.p, means: self.means.to_rows(), cov: CovSpec::Dense { matrix: self.sigma.to_rows() } }
    }
}

/// Covariance part of a population description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovSpec {
    Identity,
    /// Unit-variance compound symmetry, scaled by `var`.
    Compound {
        rho: f64,
        #[serde(default = "one")]
        var: f64,
    },
    /// `σ_ij = rho^{|i−j|}`.
    Ar1 {
        rho: f64,
    },
    /// Block-diagonal compound-symmetry blocks in order; sizes must sum to `p`.
    Block {
        blocks: Vec<BlockSpec>,
    },
    Dense {
        matrix: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub size: usize,
    pub rho: f64,
}

/// JSON description of a population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub k: usize,
    pub p: usize,
    pub means: Vec<Vec<f64>>,
    pub cov: CovSpec,
}

impl CovSpec {
    pub fn build(&self, p: usize) -> Result<Mat> {
        match self {
            CovSpec::Identity => Ok(Mat::identity(p)),
            CovSpec::Compound { rho, var } => Ok(compound(p, *rho).scale(*var)),
            CovSpec::Ar1 { rho } => Ok(Mat::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))),
            CovSpec::Block { blocks } => {
                let total: usize = blocks.iter().map(|b| b.size).sum();
                if total != p {
                    return Err(Error::InvalidPopulation(format!("block sizes sum to {total}, expected {p}")));
                }
                Ok(block_compound(blocks))
            }
            CovSpec::Dense { matrix } => {
                let m = Mat::from_rows(matrix)?;
                if m.rows() != p || m.cols() != p {
                    return Err(Error::DimensionMismatch { expected: p, got: m.rows() });
                }
                Ok(m)
            }
        }
    }
}

impl PopulationSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("population spec serializes")
    }

    pub fn build(&self) -> Result<PopulationModel> {
        if self.means.len() != self.k {
            return Err(Error::InvalidPopulation(format!("expected {} mean vectors, got {}", self.k, self.means.len())));
        }
        let means = Mat::from_rows(&self.means)?;
        if means.cols() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, got: means.cols() });
        }
        PopulationModel::new(means, self.cov.build(self.p)?)
    }
}

fn compound(p: usize, rho: f64) -> Mat {
    Mat::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
}

fn block_compound(blocks: &[BlockSpec]) -> Mat {
    let p = blocks.iter().map(|b| b.size).sum();
    let mut m = Mat::zeros(p, p);
    let mut start = 0;
    for b in blocks {
        for i in start..start + b.size {
            for j in start..start + b.size {
                m[(i, j)] = if i == j { 1.0 } else { b.rho };
            }
        }
        start += b.size;
    }
    m
}

/// Number of leading ones per class mean in the simulation models.
pub fn sim_model_sparsity(model_id: u8) -> Option<usize> {
    match model_id {
        1 => Some(5),
        2 => Some(3),
        3 => Some(10),
        _ => None,
    }
}

/// The three simulation populations: class `i` has ones in coordinates
/// `(i−1)s₀+1 ..= i·s₀`.
pub fn make_sim_model(model_id: u8, p: usize, k: usize) -> Result<PopulationModel> {
    let s0 = sim_model_sparsity(model_id).ok_or_else(|| Error::InvalidParameter(format!("unknown simulation model {model_id}")))?;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need K ≥ 2, got K = {k}")));
    }
    if k * s0 > p {
        return Err(Error::DimensionTooSmall(format!("p = {p} is smaller than K·s0 = {}", k * s0)));
    }
    let sigma = match model_id {
        1 => compound(p, 0.5),
        2 => {
            if p <= 100 {
                return Err(Error::DimensionTooSmall("p must exceed 100 for model 2".into()));
            }
            block_compound(&[BlockSpec { size: 100, rho: 0.7 }, BlockSpec { size: p - 100, rho: 0.5 }])
        }
        _ => CovSpec::Ar1 { rho: 0.95 }.build(p)?,
    };
    let means = Mat::from_fn(k, p, |i, c| if c >= i * s0 && c < (i + 1) * s0 { 1.0 } else { 0.0 });
    PopulationModel::new(means, sigma)
}

/// Pairwise squared Mahalanobis distances between class means, with the
/// smallest and largest off-diagonal entries.
pub fn mahalanobis_matrix(model: &PopulationModel) -> (Mat, f64, f64) {
    let k = model.k;
    let mut m = Mat::zeros(k, k);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..k {
        for j in 0..i {
            let v = model.mahalanobis_sq(model.means.row(i), model.means.row(j));
            m[(i, j)] = v;
            m[(j, i)] = v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (m, lo, hi)
}

/// Diagnostic witnesses for the regularity conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `max(λ_max, 1/λ_min)`.
    pub c0_witness: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub c1_witness: f64,
    /// `n / (K · min n_i)`, when class counts were supplied.
    pub min_class_count_ratio: Option<f64>,
    pub k_le_p_plus_1: bool,
}

/// Fills a [`ConditionReport`]; never rejects.
pub fn check_conditions(model: &PopulationModel, class_counts: Option<&[usize]>) -> ConditionReport {
    let eig = model.eigen();
    let lambda_max = eig.values[0];
    let lambda_min = *eig.values.last().unwrap();
    let (_, m_min, m_max) = mahalanobis_matrix(model);
    let min_class_count_ratio = class_counts.filter(|c| !c.is_empty()).map(|c| {
        let n: usize = c.iter().sum();
        let min = *c.iter().min().unwrap();
        n as f64 / (c.len() * min) as f64
    });
    ConditionReport {
        lambda_min,
        lambda_max,
        c0_witness: lambda_max.max(1.0 / lambda_min),
        m_min,
        m_max,
        c1_witness: m_min,
        min_class_count_ratio,
        k_le_p_plus_1: model.k <= model.p + 1,
    }
}

/// Index (0-based) of the smallest score; ties go to the lowest index.
#[inline]
pub(crate) fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = i;
        }
    }
    best
}

/// Class (1-based) whose mean is nearest to `x` in Mahalanobis distance.
pub fn optimal_classify(model: &PopulationModel, x: &[f64]) -> usize {
    assert_eq!(x.len(), model.p, "optimal_classify: wrong dimension");
    let (w, c) = model.opt_linear();
    let scores: Vec<f64> = (0..model.k).map(|i| c[i] - 2.0 * dot(w.row(i), x)).collect();
    argmin(&scores) + 1
}

/// Monte Carlo estimate of the optimal error rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ROptEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Two-class closed form `Φ(−Δ/2)`.
    pub closed_form: Option<f64>,
    /// Whether the MC estimate lies within 4 standard errors of the closed form.
    pub agrees: Option<bool>,
}

/// Draws `mc / K` points from each class in turn (at least one) and calls
/// `visit(class, x)` with 1-based class labels.
pub fn stratified_draws(model: &PopulationModel, mc: usize, rng: &mut RngStream, mut visit: impl FnMut(usize, &[f64])) {
    let per = (mc / model.k).max(1);
    let mut z = vec![0.0; model.p];
    let mut x = vec![0.0; model.p];
    for i in 0..model.k {
        for _ in 0..per {
            rng.fill_normal(&mut z);
            x.copy_from_slice(model.means.row(i));
            mvn_transform_into(&model.chol, &z, &mut x);
            visit(i + 1, &x);
        }
    }
}

/// Optimal misclassification rate by stratified Monte Carlo, plus the closed
/// form when `K = 2`.
pub fn r_opt(model: &PopulationModel, mc_samples: usize, rng: &mut RngStream) -> Result<ROptEstimate> {
    if mc_samples < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 Monte Carlo samples, got {mc_samples}")));
    }
    let mut wrong = 0usize;
    let mut total = 0usize;
    stratified_draws(model, mc_samples, rng, |label, x| {
        total += 1;
        if optimal_classify(model, x) != label {
            wrong += 1;
        }
    });
    let r = wrong as f64 / total as f64;
    let se = (r * (1.0 - r) / total as f64).sqrt();
    let (closed_form, agrees) = if model.k == 2 {
        let delta = model.mahalanobis_sq(model.mean(1), model.mean(2)).sqrt();
        let cf = std_normal_cdf(-delta / 2.0);
        let tol = 4.0 * (cf * (1.0 - cf) / total as f64).sqrt().max(se);
        (Some(cf), Some((r - cf).abs() <= tol))
    } else {
        (None, None)
    };
    Ok(ROptEstimate { estimate: r, std_error: se, samples: total, closed_form, agrees })
}

/// Observations with class labels in `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: Mat,
    pub labels: Vec<usize>,
    pub k: usize,
}

impl LabeledSample {
    pub fn new(x: Mat, labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::DimensionMismatch { expected: x.rows(), got: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > k) {
            return Err(Error::InvalidParameter(format!("label {bad} outside 1..={k}")));
        }
        Ok(LabeledSample { x, labels, k })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &l in &self.labels {
            c[l - 1] += 1;
        }
        c
    }

    /// Subsample by row indices, keeping their order.
    pub fn subset(&self, rows: &[usize]) -> LabeledSample {
        let p = self.p();
        let mut data = Vec::with_capacity(rows.len() * p);
        for &r in rows {
            data.extend_from_slice(self.x.row(r));
        }
        LabeledSample { x: Mat::from_vec(rows.len(), p, data).unwrap(), labels: rows.iter().map(|&r| self.labels[r]).collect(), k: self.k }
    }
}

/// `n_per_class` draws from each class, class blocks contiguous.
pub fn sample_dataset(model: &PopulationModel, n_per_class: usize, rng: &mut RngStream) -> LabeledSample {
    let n = model.k * n_per_class;
    let mut data = Vec::with_capacity(n * model.p);
    let mut labels = Vec::with_capacity(n);
    stratified_draws(model, n, rng, |label, x| {
        data.extend_from_slice(x);
        labels.push(label);
    });
    LabeledSample { x: Mat::from_vec(n, model.p, data).unwrap(), labels, k: model.k }
}
