//! Normal and bivariate normal CDFs, pseudoinverse and correlated sampling.

use hdlda::numerics::{bvn_lower_cdf, cholesky, default_pinv_tol, mvn_sample, pinv, rng_stream, std_normal_cdf, Mat};

fn main() -> anyhow::Result<()> {
    for x in [-3.0, -1.0, 0.0, 1.96] {
        println!("Phi({x:>5}) = {:.12}", std_normal_cdf(x));
    }
    for rho in [-0.9, 0.0, 0.5, 0.999] {
        println!("P(U <= 0.3, V <= -0.2; rho = {rho:>6}) = {:.12}", bvn_lower_cdf(0.3, -0.2, rho)?);
    }

    // Rank two, so only the pseudoinverse exists.
    let a = Mat::from_rows(&[vec![2.0, 1.0, 1.0], vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]])?;
    let x = pinv(&a, default_pinv_tol(3))?;
    println!("\npinv(A):");
    for r in 0..3 {
        println!("  {:>9.5?}", x.row(r));
    }
    println!("max |A X A - A| = {:.2e}", a.matmul(&x).matmul(&a).sub(&a).max_abs());

    let sigma = Mat::from_rows(&[vec![1.0, 0.8], vec![0.8, 2.0]])?;
    let l = cholesky(&sigma)?;
    let mut rng = rng_stream(1, 0);
    let n = 100_000;
    let (mut sxy, mut syy) = (0.0, 0.0);
    for _ in 0..n {
        let z = mvn_sample(&mut rng, &[0.0, 0.0], &l);
        sxy += z[0] * z[1];
        syy += z[1] * z[1];
    }
    println!("\nsample cov(x, y) = {:.3} (0.8), var(y) = {:.3} (2.0)", sxy / n as f64, syy / n as f64);
    Ok(())
}
