//! Shared oracles and instance generators for the integration tests.
#![allow(dead_code)]

use hdlda::lp::StandardLp;
use hdlda::numerics::{Mat, RngStream};
use hdlda::population::PopulationModel;

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut vec![], f);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpOracle {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Exhaustive answer for `min cᵀz, Gz <= g, z >= 0`. The feasible set is
/// pointed, so it is empty iff it has no vertex, and the objective is
/// unbounded iff some extreme ray of `{r >= 0, Gr <= 0}` descends.
pub fn vertex_oracle(lp: &StandardLp) -> LpOracle {
    let (m, q) = (lp.g.len(), lp.c.len());
    // All m + q constraints as rows `a·z <= b`.
    let mut rows: Vec<(Vec<f64>, f64)> = (0..m).map(|i| (lp.g_mat.row(i).to_vec(), lp.g[i])).collect();
    for j in 0..q {
        let mut e = vec![0.0; q];
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let feasible = |z: &[f64], homogeneous: bool| {
        rows.iter().all(|(a, b)| {
            let lhs: f64 = a.iter().zip(z).map(|(x, y)| x * y).sum();
            lhs <= if homogeneous { 0.0 } else { *b } + 1e-9
        })
    };
    let obj = |z: &[f64]| lp.c.iter().zip(z).map(|(x, y)| x * y).sum::<f64>();

    let mut best: Option<f64> = None;
    combinations(m + q, q, &mut |idx| {
        let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(z) = solve_dense(a, b) {
            if feasible(&z, false) {
                let v = obj(&z);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    let Some(best) = best else { return LpOracle::Infeasible };

    let mut unbounded = false;
    if q == 1 {
        unbounded = feasible(&[1.0], true) && lp.c[0] < -1e-9;
    } else {
        combinations(m + q, q - 1, &mut |idx| {
            let mut a: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
            let mut b = vec![0.0; q - 1];
            a.push(vec![1.0; q]);
            b.push(1.0);
            if let Some(r) = solve_dense(a, b) {
                if feasible(&r, true) && obj(&r) < -1e-9 {
                    unbounded = true;
                }
            }
        });
    }
    if unbounded {
        LpOracle::Unbounded
    } else {
        LpOracle::Optimal(best)
    }
}

/// Integer data in `[-3, 3]`.
pub fn random_lp(rng: &mut RngStream, m: usize, q: usize) -> StandardLp {
    let mut int = || rng.below(7) as f64 - 3.0;
    let c = (0..q).map(|_| int()).collect();
    let g_mat = Mat::from_fn(m, q, |_, _| int());
    let g = (0..m).map(|_| int()).collect();
    StandardLp::new(c, g_mat, g).unwrap()
}

pub fn random_normal_mat(rng: &mut RngStream, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.normal())
}

/// `B Bᵀ/p + floor·I` for Gaussian `B`.
pub fn random_spd(rng: &mut RngStream, p: usize, floor: f64) -> Mat {
    let b = random_normal_mat(rng, p, p);
    let mut s = b.mul_self_transpose().scale(1.0 / p as f64).add_diag(floor);
    s.symmetrize();
    s
}

/// Symmetric `p×p` of rank `r` with eigenvalues of both signs.
pub fn random_symmetric_rank(rng: &mut RngStream, p: usize, r: usize) -> Mat {
    let mut out = Mat::zeros(p, p);
    for t in 0..r {
        let v: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
        let w = if t % 3 == 2 { -(0.5 + rng.uniform()) } else { 0.5 + 2.0 * rng.uniform() };
        for i in 0..p {
            for j in 0..p {
                out[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    out.symmetrize();
    out
}

/// Largest of the four Penrose residuals, relative to `max |A|`.
pub fn penrose_residual(a: &Mat, x: &Mat) -> f64 {
    let ax = a.matmul(x);
    let xa = x.matmul(a);
    let r1 = ax.matmul(a).sub(a).max_abs();
    let r2 = xa.matmul(x).sub(x).max_abs();
    let r3 = ax.sub(&ax.transpose()).max_abs();
    let r4 = xa.sub(&xa.transpose()).max_abs();
    r1.max(r2).max(r3).max(r4) / a.max_abs().max(1e-300)
}

/// Random population with well-conditioned `Σ` and means scaled so the
/// smallest squared Mahalanobis gap is `sep²`.
pub fn random_population(rng: &mut RngStream, k: usize, p: usize, sep: f64) -> PopulationModel {
    let sigma = random_spd(rng, p, 0.5);
    let raw = random_normal_mat(rng, k, p);
    let tmp = PopulationModel::new(raw.clone(), sigma.clone()).unwrap();
    let (_, m_min, _) = hdlda::population::mahalanobis_matrix(&tmp);
    let means = raw.scale(sep / m_min.sqrt());
    PopulationModel::new(means, sigma).unwrap()
}
