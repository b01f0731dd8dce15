//! Nearest shrunken centroids.

use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::population::LabeledSample;

/// Shrinkage statistics that do not depend on `Δ`.
#[derive(Debug, Clone)]
pub struct NscStats {
    pub k: usize,
    pub p: usize,
    pub n: usize,
    pub class_means: Mat,
    pub class_counts: Vec<usize>,
    pub overall: Vec<f64>,
    /// Pooled within-class standard deviations (divisor `n − K`).
    pub s: Vec<f64>,
    pub s0: f64,
    /// `d_ik`, rows per class.
    pub d: Mat,
}

pub fn nsc_stats(data: &LabeledSample) -> Result<NscStats> {
    let (k, p, n) = (data.k, data.p(), data.n());
    let counts = data.counts();
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(i + 1));
    }
    if n <= k {
        return Err(Error::DegenerateDesign { k, n });
    }
    let mut means = Mat::zeros(k, p);
    let mut overall = vec![0.0; p];
    for (r, &l) in data.labels.iter().enumerate() {
        for ((m, o), v) in means.row_mut(l - 1).iter_mut().zip(overall.iter_mut()).zip(data.x.row(r)) {
            *m += v;
            *o += v;
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        means.row_mut(i).iter_mut().for_each(|m| *m /= c as f64);
    }
    overall.iter_mut().for_each(|o| *o /= n as f64);
    let mut ss = vec![0.0; p];
    for (r, &l) in data.labels.iter().enumerate() {
        for ((acc, v), m) in ss.iter_mut().zip(data.x.row(r)).zip(means.row(l - 1)) {
            *acc += (v - m) * (v - m);
        }
    }
    let s: Vec<f64> = ss.iter().map(|v| (v / (n - k) as f64).sqrt()).collect();
    let s0 = median(&s);
    let mut d = Mat::zeros(k, p);
    for i in 0..k {
        let mi = (1.0 / counts[i] as f64 - 1.0 / n as f64).sqrt();
        for c in 0..p {
            let scale = mi * (s[c] + s0);
            d[(i, c)] = if scale > 0.0 { (means[(i, c)] - overall[c]) / scale } else { 0.0 };
        }
    }
    Ok(NscStats { k, p, n, class_means: means, class_counts: counts, overall, s, s0, d })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

impl NscStats {
    pub fn max_abs_d(&self) -> f64 {
        self.d.max_abs()
    }

    /// Shrunken centroids for threshold `delta`.
    pub fn centroids(&self, delta: f64) -> Mat {
        let mut c = Mat::zeros(self.k, self.p);
        for i in 0..self.k {
            let mi = (1.0 / self.class_counts[i] as f64 - 1.0 / self.n as f64).sqrt();
            for f in 0..self.p {
                let d = self.d[(i, f)];
                let shrunk = d.signum() * (d.abs() - delta).max(0.0);
                c[(i, f)] = self.overall[f] + mi * (self.s[f] + self.s0) * shrunk;
            }
        }
        c
    }

    pub fn priors(&self) -> Vec<f64> {
        self.class_counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }
}
