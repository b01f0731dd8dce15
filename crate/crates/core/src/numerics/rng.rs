use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::mat::{dot, Mat};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seedable, platform-independent random stream identified by
/// `(master_seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: Xoshiro256StarStar,
    spare: Option<f64>,
}

/// Derives an independent stream from a master seed and a stream index.
pub fn rng_stream(master_seed: u64, stream_id: u64) -> RngStream {
    let seed = splitmix64(splitmix64(master_seed) ^ splitmix64(stream_id.wrapping_mul(GOLDEN).wrapping_add(1)));
    RngStream { seed, inner: Xoshiro256StarStar::seed_from_u64(seed), spare: None }
}

impl RngStream {
    /// The mixed 64-bit seed this stream was started from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate by Marsaglia's polar method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * libm::log(s) / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for z in out.iter_mut() {
            *z = self.normal();
        }
    }

    /// Uniform integer in `0..n` by rejection (unbiased).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.inner.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// Draws `mean + chol · z` with `z` i.i.d. standard normal.
pub fn mvn_sample(rng: &mut RngStream, mean: &[f64], chol: &Mat) -> Vec<f64> {
    let p = mean.len();
    assert_eq!(chol.rows(), p);
    let mut z = vec![0.0; p];
    rng.fill_normal(&mut z);
    let mut x = mean.to_vec();
    mvn_transform_into(chol, &z, &mut x);
    x
}

/// `out += chol · z` for a lower-triangular `chol`.
pub(crate) fn mvn_transform_into(chol: &Mat, z: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate().take(z.len()) {
        *o += dot(&chol.row(i)[..=i], &z[..=i]);
    }
}
