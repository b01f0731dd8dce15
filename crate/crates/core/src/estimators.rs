//! Sample estimators: class means, pooled covariance, its shrinkage
//! correction and thresholded versions, thresholded mean differences, LP
//! discriminant directions, and population sparsity and rate measures.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::solve_l1_linf;
use crate::numerics::{dot, norm1, sub_vec, Mat};
use crate::population::{mahalanobis_matrix, LabeledSample, PopulationModel};

/// Class means, counts and the pooled within-class covariance (divisor `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct FittedStats {
    pub k: usize,
    pub p: usize,
    pub n: usize,
    pub class_means: Mat,
    pub class_counts: Vec<usize>,
    pub pooled_cov: Mat,
    /// `1 − K/n`.
    pub shrink_factor: f64,
}

impl FittedStats {
    /// `ln p / n`, the scale shared by every threshold.
    pub fn log_p_over_n(&self) -> f64 {
        (self.p as f64).ln() / self.n as f64
    }

    /// `δ̂_{j1} = x̄_j − x̄₁` (1-based `j`).
    pub fn delta_to_1(&self, j: usize) -> Vec<f64> {
        sub_vec(self.class_means.row(j - 1), self.class_means.row(0))
    }

    fn check_design(&self) -> Result<()> {
        if self.k >= self.n {
            return Err(Error::DegenerateDesign { k: self.k, n: self.n });
        }
        Ok(())
    }
}

pub fn fit_stats(data: &LabeledSample) -> Result<FittedStats> {
    let (k, p, n) = (data.k, data.p(), data.n());
    let counts = data.counts();
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(i + 1));
    }
    let mut means = Mat::zeros(k, p);
    for (r, &l) in data.labels.iter().enumerate() {
        for (m, v) in means.row_mut(l - 1).iter_mut().zip(data.x.row(r)) {
            *m += v;
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        for m in means.row_mut(i) {
            *m /= c as f64;
        }
    }
    let mut cov = Mat::zeros(p, p);
    let mut centered = vec![0.0; p];
    for (r, &l) in data.labels.iter().enumerate() {
        for ((c, x), m) in centered.iter_mut().zip(data.x.row(r)).zip(means.row(l - 1)) {
            *c = x - m;
        }
        for i in 0..p {
            let ci = centered[i];
            if ci != 0.0 {
                for (o, c) in cov.row_mut(i)[..=i].iter_mut().zip(&centered[..=i]) {
                    *o += ci * c;
                }
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for i in 0..p {
        for j in 0..=i {
            let v = cov[(i, j)] * inv_n;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(FittedStats { k, p, n, class_means: means, class_counts: counts, pooled_cov: cov, shrink_factor: 1.0 - k as f64 / n as f64 })
}

/// `Σ̄ = Σ̂ / (1 − K/n)`.
pub fn corrected_cov(stats: &FittedStats) -> Result<Mat> {
    stats.check_design()?;
    Ok(stats.pooled_cov.scale(1.0 / stats.shrink_factor))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdedCov {
    pub sigma_tilde: Mat,
    pub t_n: f64,
    pub m1: f64,
}

/// Hard-thresholds the shrinkage-corrected covariance at `t_n = M₁√(ln p / n)`.
pub fn threshold_cov(stats: &FittedStats, m1: f64) -> Result<ThresholdedCov> {
    if !(m1 >= 0.0) {
        return Err(Error::InvalidParameter(format!("M1 must be nonnegative, got {m1}")));
    }
    let t_n = m1 * stats.log_p_over_n().sqrt();
    let mut sigma_tilde = corrected_cov(stats)?;
    hard_threshold_in_place(&mut sigma_tilde, t_n);
    Ok(ThresholdedCov { sigma_tilde, t_n, m1 })
}

/// Zeroes every entry with `|a_kl| < t`.
pub fn hard_threshold_in_place(a: &mut Mat, t: f64) {
    for v in a.as_mut_slice() {
        if v.abs() < t {
            *v = 0.0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdedDeltas {
    /// Row `j` is `δ̃_{j1}`; row 1 is zero.
    pub deltas_to_1: Mat,
    pub a_n: f64,
    pub m2: f64,
    pub alpha: f64,
}

impl ThresholdedDeltas {
    /// `δ̃_{ji} = δ̃_{j1} − δ̃_{i1}` (1-based).
    pub fn delta(&self, j: usize, i: usize) -> Vec<f64> {
        sub_vec(self.deltas_to_1.row(j - 1), self.deltas_to_1.row(i - 1))
    }
}

/// Keeps entries of `δ̂_{j1}` with `|δ̂_{j1}^k| >= a_n = M₂(ln p / n)^α`.
pub fn threshold_deltas(stats: &FittedStats, m2: f64, alpha: f64) -> Result<ThresholdedDeltas> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    if !(m2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("M2 must be nonnegative, got {m2}")));
    }
    let a_n = m2 * stats.log_p_over_n().powf(alpha);
    let mut deltas = Mat::zeros(stats.k, stats.p);
    for j in 2..=stats.k {
        let d = stats.delta_to_1(j);
        for (o, v) in deltas.row_mut(j - 1).iter_mut().zip(d) {
            *o = if v.abs() >= a_n { v } else { 0.0 };
        }
    }
    Ok(ThresholdedDeltas { deltas_to_1: deltas, a_n, m2, alpha })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpdDirections {
    /// Row `j` is `β̂_{j1}`; row 1 is zero.
    pub betas_to_1: Mat,
    pub lambda_n: f64,
    pub feasible_flags: Vec<bool>,
}

impl LpdDirections {
    pub fn all_feasible(&self) -> bool {
        self.feasible_flags.iter().all(|&f| f)
    }
}

/// Solves `min ‖β‖₁ s.t. ‖Σ̄β − δ̂_{j1}‖∞ <= λ` for every `j > 1`.
/// Rows whose LP fails are zero and flagged.
pub fn lpd_directions(stats: &FittedStats, lambda: f64) -> Result<LpdDirections> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let sigma_bar = corrected_cov(stats)?;
    lpd_directions_with(stats, &sigma_bar, lambda)
}

pub(crate) fn lpd_directions_with(stats: &FittedStats, sigma_bar: &Mat, lambda: f64) -> Result<LpdDirections> {
    let rows: Vec<Option<Vec<f64>>> = (2..=stats.k).into_par_iter().map(|j| solve_l1_linf(sigma_bar, &stats.delta_to_1(j), lambda).ok()).collect();
    let mut betas = Mat::zeros(stats.k, stats.p);
    let mut flags = vec![true; stats.k];
    for (idx, row) in rows.into_iter().enumerate() {
        match row {
            Some(b) => betas.row_mut(idx + 1).copy_from_slice(&b),
            None => flags[idx + 1] = false,
        }
    }
    Ok(LpdDirections { betas_to_1: betas, lambda_n: lambda, feasible_flags: flags })
}

/// Population sparsity measures and the convergence-rate quantities they feed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub c_hp: f64,
    pub d_gp: f64,
    pub q_n: usize,
    pub h: f64,
    pub g: f64,
    pub alpha: f64,
    pub r: f64,
    pub a_n: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub s_n: f64,
    pub d_n_rate: f64,
    pub b_n: f64,
    pub r_n: f64,
    /// `max_{i≠j} ‖Σ⁻¹δ_{ji}‖₁`.
    pub l1_beta_max: f64,
    /// `√(M_max ln p / n)`; the LP tuning constant is a multiple of this.
    pub lambda_n_unit: f64,
}

/// `|x|^e` with the convention `0^e = 0`.
fn pow0(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(e)
    }
}

/// `C_{h,p} = max_k Σ_l |σ_kl|^h`.
pub fn sparsity_c_hp(sigma: &Mat, h: f64) -> f64 {
    (0..sigma.rows()).map(|k| sigma.row(k).iter().map(|&v| pow0(v, h)).sum::<f64>()).fold(0.0, f64::max)
}

/// `D_{g,p} = max_{i≠j} Σ_k |δ_{ji}^k|^{2g}`.
pub fn sparsity_d_gp(means: &Mat, g: f64) -> f64 {
    let k = means.rows();
    let mut best = 0.0f64;
    for i in 0..k {
        for j in 0..i {
            let s: f64 = means.row(i).iter().zip(means.row(j)).map(|(a, b)| pow0(a - b, 2.0 * g)).sum();
            best = best.max(s);
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
pub fn sparsity_and_rates(model: &PopulationModel, n: usize, k_classes: usize, h: f64, g: f64, alpha: f64, r: f64, m2: f64) -> Result<RateReport> {
    if n <= k_classes {
        return Err(Error::DegenerateDesign { k: k_classes, n });
    }
    if !(0.0..1.0).contains(&h) || !(0.0..1.0).contains(&g) {
        return Err(Error::InvalidParameter("h and g must lie in [0, 1)".into()));
    }
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("r must exceed 1, got {r}")));
    }
    let p = model.p();
    let (nf, pf, kf) = (n as f64, p as f64, k_classes as f64);
    let lpn = pf.ln() / nf;
    let c_hp = sparsity_c_hp(model.sigma(), h);
    let d_gp = sparsity_d_gp(model.means(), g);
    let a_n = m2 * lpn.powf(alpha);
    let q_n = (2..=model.k())
        .map(|j| {
            let d = sub_vec(model.mean(j), model.mean(1));
            d.iter().filter(|v| v.abs() > a_n / r).count()
        })
        .max()
        .unwrap_or(0);
    let (_, m_min, m_max) = mahalanobis_matrix(model);
    let mut l1 = 0.0f64;
    for i in 1..=model.k() {
        for j in 1..i {
            let beta = model.solve(&sub_vec(model.mean(i), model.mean(j)));
            l1 = l1.max(norm1(&beta));
        }
    }
    let s_n = pf * lpn.sqrt() + kf / m_min.sqrt() * (pf / nf).sqrt();
    let d_n_rate = c_hp * lpn.powf((1.0 - h) / 2.0);
    let b_n = d_n_rate.max((a_n.powf(2.0 * (1.0 - g)) * d_gp).sqrt() / m_min.sqrt()).max(((c_hp + kf) * q_n as f64 / nf).sqrt() / m_min.sqrt());
    let r_n = ((kf * m_max).sqrt() * l1 + l1 * l1) * lpn.sqrt();
    Ok(RateReport {
        c_hp,
        d_gp,
        q_n,
        h,
        g,
        alpha,
        r,
        a_n,
        m_min,
        m_max,
        s_n,
        d_n_rate,
        b_n,
        r_n,
        l1_beta_max: l1,
        lambda_n_unit: (m_max * lpn).sqrt(),
    })
}

/// `‖Aβ − d‖∞`.
pub fn linf_residual(a: &Mat, beta: &[f64], d: &[f64]) -> f64 {
    (0..a.rows()).map(|k| (dot(a.row(k), beta) - d[k]).abs()).fold(0.0, f64::max)
}
