//! The two-class example where a rule uses only part of the signal: its
//! error ratio to the optimum, and how fast the strip probability vanishes.

use hdlda::theory::example_bounds;

fn main() -> anyhow::Result<()> {
    let eps = 1.0;
    println!("{:>5}  {:>12}  {:>12}  {:>12}", "d", "1/Phi(d/2)", "exp(-d e/2)", "strip");
    for d in [1.0, 2.0, 5.0, 10.0, 20.0] {
        let b = example_bounds(d, eps)?;
        println!("{d:>5}  {:>12.6}  {:>12.4e}  {:>12.4e}", b.upper_ratio_bound, b.mixing_bound, b.strip_prob);
    }
    Ok(())
}
