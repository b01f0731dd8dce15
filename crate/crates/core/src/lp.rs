//! Dense two-phase primal simplex, and the ℓ1-minimization with an ℓ∞
//! residual constraint that the LP discriminant reduces to.
//!
//! Problems are taken in the form `min cᵀz  s.t.  G z <= g,  z >= 0`.
//! Pricing is Dantzig's most-negative reduced cost; after `2(m+q)`
//! consecutive degenerate pivots the solver switches to Bland's rule for the
//! remainder of the phase, which rules out cycling.

use crate::error::{Error, Result};
use crate::numerics::{norm_inf, Mat};

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct StandardLp {
    pub c: Vec<f64>,
    pub g_mat: Mat,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub z: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl StandardLp {
    pub fn new(c: Vec<f64>, g_mat: Mat, g: Vec<f64>) -> Result<Self> {
        if g_mat.cols() != c.len() {
            return Err(Error::DimensionMismatch { expected: c.len(), got: g_mat.cols() });
        }
        if g_mat.rows() != g.len() {
            return Err(Error::DimensionMismatch { expected: g.len(), got: g_mat.rows() });
        }
        if !g_mat.is_finite() || c.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("LP data must be finite".into()));
        }
        Ok(StandardLp { c, g_mat, g })
    }

    pub fn num_constraints(&self) -> usize {
        self.g.len()
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn default_max_iters(&self) -> usize {
        50 * (self.num_constraints() + self.num_vars()).max(1)
    }
}

struct Tableau {
    m: usize,
    /// structural + slack + artificial columns, rhs is stored after them
    ncols: usize,
    n_struct: usize,
    n_slack: usize,
    stride: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    max_iters: usize,
    degenerate_run: usize,
    bland_after: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn build(lp: &StandardLp, max_iters: usize) -> Self {
        let m = lp.num_constraints();
        let q = lp.num_vars();
        let n_art = lp.g.iter().filter(|&&v| v < 0.0).count();
        let ncols = q + m + n_art;
        let stride = ncols + 1;
        let mut data = vec![0.0; m * stride];
        let mut basis = vec![0; m];
        let mut art = q + m;
        for r in 0..m {
            let row = &mut data[r * stride..(r + 1) * stride];
            let neg = lp.g[r] < 0.0;
            let sgn = if neg { -1.0 } else { 1.0 };
            for (dst, &src) in row[..q].iter_mut().zip(lp.g_mat.row(r)) {
                *dst = sgn * src;
            }
            row[q + r] = sgn;
            row[ncols] = sgn * lp.g[r];
            if neg {
                row[art] = 1.0;
                basis[r] = art;
                art += 1;
            } else {
                basis[r] = q + r;
            }
        }
        Tableau {
            m,
            ncols,
            n_struct: q,
            n_slack: m,
            stride,
            data,
            obj: vec![0.0; stride],
            basis,
            iterations: 0,
            max_iters,
            degenerate_run: 0,
            bland_after: 2 * (m + q),
        }
    }

    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.stride + self.ncols]
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct + self.n_slack
    }

    /// Sets the objective row to the reduced costs of `cost` under the current basis.
    fn price(&mut self, cost: &[f64]) {
        self.obj.iter_mut().for_each(|v| *v = 0.0);
        self.obj[..cost.len()].copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let (obj, row) = (&mut self.obj, &self.data[r * self.stride..(r + 1) * self.stride]);
                for (o, v) in obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let stride = self.stride;
        let piv = self.data[r * stride + e];
        {
            let prow = &mut self.data[r * stride..(r + 1) * stride];
            let inv = 1.0 / piv;
            for v in prow.iter_mut() {
                *v *= inv;
            }
            prow[e] = 1.0;
        }
        let prow: Vec<f64> = self.row(r).to_vec();
        // Columns where the pivot row is nonzero; the rest of each row is untouched.
        let nz: Vec<usize> = prow.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect();
        let dense = nz.len() * 3 > stride;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let row = &mut self.data[i * stride..(i + 1) * stride];
            let f = row[e];
            if f == 0.0 {
                continue;
            }
            if dense {
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
            } else {
                for &j in &nz {
                    row[j] -= f * prow[j];
                }
            }
            row[e] = 0.0;
        }
        let f = self.obj[e];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
        self.iterations += 1;
    }

    fn choose_entering(&self, allow_artificial: bool, bland: bool) -> Option<usize> {
        let limit = if allow_artificial { self.ncols } else { self.n_struct + self.n_slack };
        let mut best: Option<(usize, f64)> = None;
        for j in 0..limit {
            let d = self.obj[j];
            if d < -OPT_TOL {
                if bland {
                    return Some(j);
                }
                if best.is_none_or(|(_, b)| d < b) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn choose_leaving(&self, e: usize, bland: bool) -> Option<(usize, f64)> {
        let mut min_ratio = f64::INFINITY;
        for r in 0..self.m {
            let a = self.data[r * self.stride + e];
            if a > PIVOT_TOL {
                let ratio = self.rhs(r).max(0.0) / a;
                if ratio < min_ratio {
                    min_ratio = ratio;
                }
            }
        }
        if !min_ratio.is_finite() {
            return None;
        }
        let tie = min_ratio + 1e-12 * (1.0 + min_ratio);
        let mut chosen: Option<usize> = None;
        for r in 0..self.m {
            let a = self.data[r * self.stride + e];
            if a > PIVOT_TOL && self.rhs(r).max(0.0) / a <= tie {
                chosen = match chosen {
                    None => Some(r),
                    Some(c) => {
                        let better = if bland { self.basis[r] < self.basis[c] } else { a > self.data[c * self.stride + e] };
                        Some(if better { r } else { c })
                    }
                };
            }
        }
        chosen.map(|r| (r, min_ratio))
    }

    fn run_phase(&mut self, allow_artificial: bool) -> PhaseOutcome {
        self.degenerate_run = 0;
        let mut bland = false;
        loop {
            let Some(e) = self.choose_entering(allow_artificial, bland) else {
                return PhaseOutcome::Optimal;
            };
            let Some((r, step)) = self.choose_leaving(e, bland) else {
                return PhaseOutcome::Unbounded;
            };
            if self.iterations >= self.max_iters {
                return PhaseOutcome::IterationLimit;
            }
            if step <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run >= self.bland_after {
                    bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, e);
        }
    }

    fn solution(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.n_struct];
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.n_struct {
                z[b] = self.rhs(r).max(0.0);
            }
        }
        z
    }
}

/// Two-phase primal simplex on `min cᵀz s.t. Gz <= g, z >= 0`.
pub fn solve_standard(lp: &StandardLp, max_iters: usize) -> LpSolution {
    let q = lp.num_vars();
    let mut t = Tableau::build(lp, max_iters);
    let scale = 1.0f64.max(norm_inf(&lp.g));
    let fail = |t: &Tableau, status| LpSolution { status, z: vec![0.0; q], objective_value: f64::NAN, iterations: t.iterations };

    let has_artificial = t.ncols > q + t.m;
    if has_artificial {
        let mut cost = vec![0.0; t.ncols];
        for c in cost.iter_mut().skip(q + t.m) {
            *c = 1.0;
        }
        t.price(&cost);
        match t.run_phase(true) {
            PhaseOutcome::IterationLimit => return fail(&t, LpStatus::IterationLimit),
            PhaseOutcome::Unbounded | PhaseOutcome::Optimal => {}
        }
        let infeasibility = -t.obj[t.ncols];
        if infeasibility > FEAS_TOL * scale {
            return fail(&t, LpStatus::Infeasible);
        }
        // Pivot zero-level artificials out of the basis where possible.
        for r in 0..t.m {
            if t.is_artificial(t.basis[r]) {
                let row = t.row(r);
                let limit = q + t.m;
                let mut best: Option<(usize, f64)> = None;
                for (j, &v) in row[..limit].iter().enumerate() {
                    if v.abs() > 1e-9 && best.is_none_or(|(_, b)| v.abs() > b) {
                        best = Some((j, v.abs()));
                    }
                }
                if let Some((j, _)) = best {
                    t.pivot(r, j);
                }
            }
        }
    }

    let mut cost = vec![0.0; t.ncols];
    cost[..q].copy_from_slice(&lp.c);
    t.price(&cost);
    match t.run_phase(false) {
        PhaseOutcome::IterationLimit => fail(&t, LpStatus::IterationLimit),
        PhaseOutcome::Unbounded => fail(&t, LpStatus::Unbounded),
        PhaseOutcome::Optimal => {
            let z = t.solution();
            let objective_value = lp.c.iter().zip(&z).map(|(c, z)| c * z).sum();
            LpSolution { status: LpStatus::Optimal, z, objective_value, iterations: t.iterations }
        }
    }
}

/// `min ‖β‖₁  s.t.  ‖Aβ − d‖∞ <= λ`, solved by splitting `β = β⁺ − β⁻`.
pub fn solve_l1_linf(a: &Mat, d: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let p = d.len();
    if !a.is_square() || a.rows() != p {
        return Err(Error::DimensionMismatch { expected: p, got: a.rows() });
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    // Zero is feasible and ℓ1-minimal.
    if norm_inf(d) <= lambda {
        return Ok(vec![0.0; p]);
    }
    let mut g_mat = Mat::zeros(2 * p, 2 * p);
    let mut g = vec![0.0; 2 * p];
    for k in 0..p {
        let ak = a.row(k);
        let top = g_mat.row_mut(k);
        top[..p].copy_from_slice(ak);
        for (dst, &v) in top[p..].iter_mut().zip(ak) {
            *dst = -v;
        }
        let bottom = g_mat.row_mut(p + k);
        for (dst, &v) in bottom[..p].iter_mut().zip(ak) {
            *dst = -v;
        }
        bottom[p..].copy_from_slice(ak);
        g[k] = d[k] + lambda;
        g[p + k] = -d[k] + lambda;
    }
    let lp = StandardLp::new(vec![1.0; 2 * p], g_mat, g)?;
    let sol = solve_standard(&lp, lp.default_max_iters());
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::IterationLimit | LpStatus::Unbounded => return Err(Error::IterationLimit(sol.iterations)),
    }
    let beta: Vec<f64> = (0..p).map(|k| sol.z[k] - sol.z[p + k]).collect();
    let resid = a.matvec(&beta);
    let viol = resid.iter().zip(d).map(|(r, d)| (r - d).abs()).fold(0.0, f64::max);
    if viol > lambda + 1e-8 * (1.0 + lambda.max(norm_inf(d))) {
        return Err(Error::Infeasible);
    }
    Ok(beta)
}
