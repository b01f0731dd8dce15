//! Pair geometry of a fitted rule against the truth, the exact bivariate
//! normal evaluation of the misclassification-gap bound, the two-class
//! equality, the parallel-boundary example, and the lower-bound expression.

use serde::Serialize;

use crate::classifiers::{paired_conditional_errors, ClassifierModel, McEstimate};
use crate::error::{Error, Result};
use crate::numerics::{add_vec, bvn_lower_cdf, bvn_lower_cdf_closed, dot, std_normal_cdf, std_normal_sf, sub_vec, Mat, RngStream};
use crate::population::PopulationModel;

/// Geometry of one ordered pair `(j, i)`, `j ≠ i` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTerm {
    pub j: usize,
    pub i: usize,
    /// `Σ^{-1/2}(μ_j − μ_i)`.
    pub a: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub d: f64,
    pub d_hat: f64,
    pub t: f64,
    pub perp_norm_sq: f64,
    pub norm_a: f64,
    pub norm_a_hat: f64,
    /// Correlation of `(âᵀZ, aᵀZ)`.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairGeometry {
    pub k: usize,
    /// Ordered by `i`, then `j`.
    pub pairs: Vec<PairTerm>,
    pub m_max: f64,
}

impl PairGeometry {
    pub fn pair(&self, j: usize, i: usize) -> &PairTerm {
        self.pairs.iter().find(|t| t.j == j && t.i == i).expect("pair exists")
    }
}

/// Direction `w_ji` in data coordinates and midpoint `b̂_ji`, so that the
/// rule prefers `i` over `j` when `w_jiᵀ(x − b̂_ji) < 0`.
fn direction(model: &ClassifierModel, j: usize, i: usize) -> (Vec<f64>, Vec<f64>) {
    let half = |v: Vec<f64>| v.into_iter().map(|x| 0.5 * x).collect::<Vec<f64>>();
    match model {
        ClassifierModel::Opt(r) => {
            let pop = &r.population;
            let w = pop.solve(&sub_vec(pop.mean(j), pop.mean(i)));
            (w, half(add_vec(pop.mean(i), pop.mean(j))))
        }
        ClassifierModel::Glda(r) => {
            let (mj, mi) = (r.class_means.row(j - 1), r.class_means.row(i - 1));
            (r.omega.matvec(&sub_vec(mj, mi)), half(add_vec(mi, mj)))
        }
        ClassifierModel::Slda(r) => (r.omega.matvec(&r.delta(j, i)), r.midpoint(j, i)),
        ClassifierModel::Lpd(r) => {
            let (mj, mi) = (r.class_means.row(j - 1), r.class_means.row(i - 1));
            (r.beta(j, i), half(add_vec(mj, mi)))
        }
        ClassifierModel::Nsc(r) => {
            // Scores are ‖x − c‖² in the diagonal metric minus 2 log π; write
            // the pairwise comparison with the prior term folded into b̂.
            let inv: Vec<f64> =
                r.s.iter()
                    .map(|&s| {
                        let d = s + r.s0;
                        if d > 0.0 {
                            1.0 / (d * d)
                        } else {
                            0.0
                        }
                    })
                    .collect();
            let (cj, ci) = (r.centroids.row(j - 1), r.centroids.row(i - 1));
            let w: Vec<f64> = sub_vec(cj, ci).iter().zip(&inv).map(|(a, b)| a * b).collect();
            let mut b = half(add_vec(ci, cj));
            let ww = dot(&w, &w);
            if ww > 0.0 {
                let shift = (r.priors[j - 1].ln() - r.priors[i - 1].ln()) / ww;
                for (bk, wk) in b.iter_mut().zip(&w) {
                    *bk -= shift * wk;
                }
            }
            (w, b)
        }
    }
}

/// Pair geometry of `model` relative to `truth`.
pub fn pair_geometry(truth: &PopulationModel, model: &ClassifierModel) -> Result<PairGeometry> {
    if model.p() != truth.p() {
        return Err(Error::DimensionMismatch { expected: truth.p(), got: model.p() });
    }
    if model.k() != truth.k() {
        return Err(Error::DimensionMismatch { expected: truth.k(), got: model.k() });
    }
    let k = truth.k();
    let root = truth.sigma_sqrt();
    // The optimal rule of this very population estimates nothing.
    let exact = matches!(model, ClassifierModel::Opt(r) if r.population.means() == truth.means() && r.population.sigma() == truth.sigma());
    let mut pairs = Vec::with_capacity(k * (k - 1));
    let mut m_max = 0.0f64;
    for i in 1..=k {
        for j in (1..=k).filter(|&j| j != i) {
            let delta = sub_vec(truth.mean(j), truth.mean(i));
            let sinv_delta = truth.solve(&delta);
            let a_sq = dot(&delta, &sinv_delta);
            m_max = m_max.max(a_sq);
            let a = root.matvec(&sinv_delta);
            let norm_a = a_sq.sqrt();
            if exact {
                pairs.push(PairTerm {
                    j,
                    i,
                    a_hat: a.clone(),
                    a,
                    d: 0.5 * a_sq,
                    d_hat: 0.5 * a_sq,
                    t: 1.0,
                    perp_norm_sq: 0.0,
                    norm_a,
                    norm_a_hat: norm_a,
                    rho: 1.0,
                });
                continue;
            }
            let (w, b_hat) = direction(model, j, i);
            let a_hat_sq = truth.sigma().quad_form(&w).max(0.0);
            let cross = dot(&delta, &w);
            let d_hat = dot(&w, &sub_vec(&b_hat, truth.mean(i)));
            let norm_a_hat = a_hat_sq.sqrt();
            let t = if a_hat_sq > 0.0 { cross / a_hat_sq } else { 0.0 };
            let rho = if norm_a > 0.0 && norm_a_hat > 0.0 { (cross / (norm_a * norm_a_hat)).clamp(-1.0, 1.0) } else { 0.0 };
            pairs.push(PairTerm {
                j,
                i,
                a,
                a_hat: root.matvec(&w),
                d: 0.5 * a_sq,
                d_hat,
                t,
                perp_norm_sq: (a_sq - t * t * a_hat_sq).max(0.0),
                norm_a,
                norm_a_hat,
                rho,
            });
        }
    }
    Ok(PairGeometry { k, pairs, m_max })
}

const RHO_EDGE: f64 = 1e-9;

/// `P(U <= h, V <= k)` for correlation `rho`, using the degenerate line
/// formulas near `|ρ| = 1`.
fn lower_orthant(h: f64, k: f64, rho: f64) -> f64 {
    if rho.abs() > 1.0 - RHO_EDGE {
        bvn_lower_cdf_closed(h, k, rho.signum())
    } else {
        bvn_lower_cdf(h, k, rho).expect("correlation inside (-1, 1)")
    }
}

/// `P(âᵀZ > d̂, aᵀZ < d)` for `Z ~ N(0, I)`.
pub fn pair_probability(t: &PairTerm) -> f64 {
    if t.norm_a == 0.0 {
        return 0.0;
    }
    let k = t.d / t.norm_a;
    if t.norm_a_hat == 0.0 {
        return if t.d_hat >= 0.0 { 0.0 } else { std_normal_cdf(k) };
    }
    let h = t.d_hat / t.norm_a_hat;
    (std_normal_cdf(k) - lower_orthant(h, k, t.rho)).clamp(0.0, 1.0)
}

/// `P(âᵀZ < d̂, aᵀZ > d)`, the reverse event.
pub fn reverse_pair_probability(t: &PairTerm) -> f64 {
    if t.norm_a == 0.0 {
        return 0.0;
    }
    let k = t.d / t.norm_a;
    if t.norm_a_hat == 0.0 {
        return if t.d_hat > 0.0 { 1.0 - std_normal_cdf(k) } else { 0.0 };
    }
    let h = t.d_hat / t.norm_a_hat;
    (std_normal_cdf(h) - lower_orthant(h, k, t.rho)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// Entry `(j−1, i−1)` holds `P(âᵀZ > d̂, aᵀZ < d)`; diagonal zero.
    pub per_pair_probability: Mat,
    pub bound: f64,
    pub r_opt_est: Option<f64>,
    pub r_t_est: Option<f64>,
    pub gap_est: Option<f64>,
    pub gap_se: Option<f64>,
    pub lower_bound: Option<f64>,
}

/// `(1/K) Σ_i Σ_{j≠i} P(âᵀZ > d̂, aᵀZ < d)`.
pub fn theorem1_bound(geom: &PairGeometry) -> BoundReport {
    let mut table = Mat::zeros(geom.k, geom.k);
    let mut total = 0.0;
    for t in &geom.pairs {
        let p = pair_probability(t);
        table[(t.j - 1, t.i - 1)] = p;
        total += p;
    }
    BoundReport {
        per_pair_probability: table,
        bound: total / geom.k as f64,
        r_opt_est: None,
        r_t_est: None,
        gap_est: None,
        gap_se: None,
        lower_bound: None,
    }
}

/// Bound plus Monte Carlo estimates of `R_T`, `R_OPT` and their paired gap.
pub fn bound_with_mc(
    truth: &PopulationModel,
    model: &ClassifierModel,
    opt: &ClassifierModel,
    mc_samples: usize,
    rng: &mut RngStream,
) -> Result<BoundReport> {
    let geom = pair_geometry(truth, model)?;
    let mut rep = theorem1_bound(&geom);
    let pe = paired_conditional_errors(&[model, opt], truth, mc_samples, rng)?;
    let gap = pe.gap(0, 1);
    rep.r_t_est = Some(pe.estimate(0).estimate);
    rep.r_opt_est = Some(pe.estimate(1).estimate);
    rep.gap_est = Some(gap.estimate);
    rep.gap_se = Some(gap.std_error);
    Ok(rep)
}

/// Signed sum of the two-class equality for `R_T − R_OPT`.
pub fn k2_equality_value(geom: &PairGeometry) -> Result<f64> {
    if geom.k != 2 {
        return Err(Error::InvalidParameter(format!("the equality needs K = 2, got {}", geom.k)));
    }
    Ok(0.5 * geom.pairs.iter().map(|t| pair_probability(t) - reverse_pair_probability(t)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K2Check {
    pub equality_value: f64,
    pub mc_gap: McEstimate,
    /// `equality_value − mc_gap.estimate`.
    pub residual: f64,
}

impl K2Check {
    pub fn within(&self, n_se: f64) -> bool {
        self.residual.abs() <= n_se * self.mc_gap.std_error
    }
}

/// Compares the exact two-class gap with its paired Monte Carlo estimate.
pub fn k2_equality_check(
    truth: &PopulationModel,
    model: &ClassifierModel,
    opt: &ClassifierModel,
    mc_samples: usize,
    rng: &mut RngStream,
) -> Result<K2Check> {
    let geom = pair_geometry(truth, model)?;
    let equality_value = k2_equality_value(&geom)?;
    let pe = paired_conditional_errors(&[model, opt], truth, mc_samples, rng)?;
    let mc_gap = pe.gap(0, 1);
    Ok(K2Check { equality_value, mc_gap, residual: equality_value - mc_gap.estimate })
}

/// Quantities of the three-class parallel-boundary example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleBounds {
    /// `1/Φ(d/2)`.
    pub upper_ratio_bound: f64,
    /// `exp(−d·ε/2)`.
    pub mixing_bound: f64,
    /// `Φ(d) − Φ(d − ε)`.
    pub strip_prob: f64,
}

pub fn example_bounds(d: f64, eps: f64) -> Result<ExampleBounds> {
    if !(d > 0.0 && eps > 0.0) {
        return Err(Error::InvalidParameter("d and eps must be positive".into()));
    }
    Ok(ExampleBounds {
        upper_ratio_bound: 1.0 / std_normal_cdf(d / 2.0),
        mixing_bound: (-d * eps / 2.0).exp(),
        strip_prob: std_normal_sf(d - eps) - std_normal_sf(d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    /// `(c₅ / (4√c₄)) · √(M_max s_n) · R_OPT`.
    pub value: f64,
    /// `min ‖a⊥‖² / ‖a‖² > c₅ s_n`.
    pub perp_condition: bool,
}

pub fn theorem3_lower_bound(geom: &PairGeometry, c4: f64, c5: f64, s_n: f64, r_opt: f64) -> Result<LowerBound> {
    if !(c4 >= 1.0 && c5 > 0.0 && s_n > 0.0) {
        return Err(Error::InvalidParameter("need c4 >= 1, c5 > 0, s_n > 0".into()));
    }
    let value = c5 / (4.0 * c4.sqrt()) * (geom.m_max * s_n).sqrt() * r_opt;
    let min_ratio = geom.pairs.iter().filter(|t| t.norm_a > 0.0).map(|t| t.perp_norm_sq / (t.norm_a * t.norm_a)).fold(f64::INFINITY, f64::min);
    Ok(LowerBound { value, perp_condition: min_ratio > c5 * s_n })
}
