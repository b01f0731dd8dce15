//! Univariate and bivariate standard normal probabilities.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal CDF via the complementary error function, so both tails
/// keep full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Φ(x)`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

// 20-point Gauss–Legendre rule on [-1, 1], one half of the symmetric nodes.
const GL_X: [f64; 10] = [
    -0.993_128_599_185_094_9,
    -0.963_971_927_277_913_8,
    -0.912_234_428_251_325_9,
    -0.839_116_971_822_218_8,
    -0.746_331_906_460_150_8,
    -0.636_053_680_726_515_0,
    -0.510_867_001_950_827_1,
    -0.373_706_088_715_419_6,
    -0.227_785_851_141_645_1,
    -0.076_526_521_133_497_33,
];
const GL_W: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];

/// `P(U <= h, V <= k)` for a standard bivariate normal pair with correlation `rho`.
///
/// Drezner–Wesolowsky correlation-integral form with Genz's refinements:
/// Gauss–Legendre quadrature in `asin(rho)` for `|rho| < 0.925`, and the
/// series-corrected integral in `sqrt(1 - rho^2)` above that.
pub fn bvn_lower_cdf(h: f64, k: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0 - 1e-12) || !rho.is_finite() {
        return Err(Error::CorrelationOutOfRange(rho));
    }
    let p = bvn_upper(-h, -k, rho);
    Ok(p.clamp(0.0, 1.0))
}

/// Same as [`bvn_lower_cdf`] but accepts `|rho| = 1`, where the pair collapses
/// onto a line.
pub fn bvn_lower_cdf_closed(h: f64, k: f64, rho: f64) -> f64 {
    if rho >= 1.0 - 1e-12 {
        std_normal_cdf(h.min(k))
    } else if rho <= -(1.0 - 1e-12) {
        (std_normal_cdf(h) - std_normal_cdf(-k)).max(0.0)
    } else {
        bvn_upper(-h, -k, rho).clamp(0.0, 1.0)
    }
}

// P(U > dh, V > dk).
fn bvn_upper(dh: f64, dk: f64, r: f64) -> f64 {
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r != 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = r.asin();
            for (x, w) in GL_X.iter().zip(GL_W) {
                for sign in [1.0, -1.0] {
                    let sn = (asr * (sign * x + 1.0) / 2.0).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (4.0 * PI);
        }
        return bvn + std_normal_cdf(-h) * std_normal_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let e0 = -(bs / as_ + hk) / 2.0;
        if e0 > -100.0 {
            bvn = a * e0.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        }
        if hk > -100.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp() * SQRT_2PI * std_normal_cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (x, w) in GL_X.iter().zip(GL_W) {
            for sign in [1.0, -1.0] {
                let t = a * (sign * x + 1.0);
                let xs = t * t;
                let rs = (1.0 - xs).sqrt();
                let e1 = -(bs / xs + hk) / 2.0;
                if e1 > -100.0 {
                    bvn += a * w * e1.exp() * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        -bvn + (std_normal_cdf(-h) - std_normal_cdf(-k)).max(0.0)
    }
}
