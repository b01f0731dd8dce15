//! Dense symmetric factorizations: Cholesky, eigendecomposition
//! (Householder tridiagonalization + implicit-shift QL) and the
//! Moore–Penrose pseudoinverse built on top of it.

use super::mat::{axpy, dot, Mat};
use crate::error::{Error, Result};

const SYM_TOL: f64 = 1e-10;

fn require_symmetric(a: &Mat) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), got: a.cols() });
    }
    if !a.is_symmetric(SYM_TOL) {
        return Err(Error::InvalidParameter("matrix is not symmetric".into()));
    }
    Ok(())
}

/// Lower Cholesky factor `L` with `L Lᵀ = a`.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    require_symmetric(a)?;
    let n = a.rows();
    let floor = 1e-12 * a.max_abs();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let s = a[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if s <= floor || !s.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: s });
        }
        let d = s.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let v = (a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j])) / d;
            l[(i, j)] = v;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the lower Cholesky factor.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &y[..i]);
        y[i] = (y[i] - s) / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Inverse of an SPD matrix from its Cholesky factor.
pub fn cholesky_inverse(l: &Mat) -> Mat {
    let n = l.rows();
    // L^{-1}, lower triangular, built row by row.
    let mut linv = Mat::zeros(n, n);
    for i in 0..n {
        linv[(i, i)] = 1.0 / l[(i, i)];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s += l[(i, k)] * linv[(k, j)];
            }
            linv[(i, j)] = -s / l[(i, i)];
        }
    }
    // A^{-1} = L^{-T} L^{-1}
    let lt = linv.transpose();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let start = i.max(j);
            let v = dot(&lt.row(i)[start..], &lt.row(j)[start..]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Eigendecomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors.
    pub vectors: Mat,
}

impl SymEigen {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let g: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        self.reconstruct(&g)
    }

    /// `V diag(g) Vᵀ` for replacement eigenvalues `g`.
    pub fn reconstruct(&self, g: &[f64]) -> Mat {
        let n = self.values.len();
        assert_eq!(g.len(), n);
        // rows of vt are eigenvectors
        let vt = self.vectors.transpose();
        let mut out = Mat::zeros(n, n);
        for (k, &gk) in g.iter().enumerate() {
            if gk == 0.0 {
                continue;
            }
            let v = vt.row(k);
            for i in 0..n {
                let c = gk * v[i];
                if c != 0.0 {
                    axpy(c, &v[..=i], &mut out.row_mut(i)[..=i]);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[(j, i)] = out[(i, j)];
            }
        }
        out
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Symmetric eigendecomposition.
pub fn sym_eigen(a: &Mat) -> Result<SymEigen> {
    require_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(SymEigen { values: vec![], vectors: Mat::zeros(0, 0) });
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (v[i][j] + v[j][i]);
            v[i][j] = s;
            v[j][i] = s;
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    // Rows of `w` are the columns of the accumulated transform.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    tql2(&mut w, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| w[order[c]][r]);
    Ok(SymEigen { values, vectors })
}

// Householder reduction to tridiagonal form (EISPACK tred2 layout).
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal form. `w` holds eigenvectors as rows.
fn tql2(w: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let budget = 30 * n.max(1);
    let mut total_iter = 0usize;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            loop {
                total_iter += 1;
                if total_iter > budget {
                    return Err(Error::NoConvergence { sweeps: budget });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut(i + 1);
                    let wi = &mut lo[i];
                    let wi1 = &mut hi[0];
                    for (a, b) in wi.iter_mut().zip(wi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Moore–Penrose pseudoinverse of a symmetric matrix. Eigenvalues with
/// `|λ| <= rel_tol * max|λ|` are treated as zero.
pub fn pinv(a: &Mat, rel_tol: f64) -> Result<Mat> {
    let eig = sym_eigen(a)?;
    Ok(pinv_from_eigen(&eig, 0.0, rel_tol))
}

/// Default rank tolerance `p * machine epsilon`.
pub fn default_pinv_tol(p: usize) -> f64 {
    p.max(1) as f64 * f64::EPSILON
}

/// Pseudoinverse of `A + shift·I` from the eigendecomposition of `A`.
pub fn pinv_from_eigen(eig: &SymEigen, shift: f64, rel_tol: f64) -> Mat {
    eig.reconstruct(&inverse_spectrum(&eig.values, shift, rel_tol))
}

/// Eigenvalues of the pseudoinverse of `A + shift·I` given those of `A`:
/// `1/(λ + shift)`, or zero when `|λ + shift| <= rel_tol · max|λ + shift|`.
pub fn inverse_spectrum(values: &[f64], shift: f64, rel_tol: f64) -> Vec<f64> {
    let shifted_max = values.iter().fold(0.0f64, |m, &l| m.max((l + shift).abs()));
    let cut = rel_tol * shifted_max;
    values
        .iter()
        .map(|&l| {
            let s = l + shift;
            if s.abs() <= cut || s == 0.0 {
                0.0
            } else {
                1.0 / s
            }
        })
        .collect()
}

/// Symmetric square root of a positive semidefinite matrix.
pub fn sym_sqrt(a: &Mat) -> Result<Mat> {
    let eig = sym_eigen(a)?;
    Ok(eig.spectral_map(|l| l.max(0.0).sqrt()))
}
