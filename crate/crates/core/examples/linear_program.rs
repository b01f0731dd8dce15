//! The simplex solver on a small LP, and the l1 / l-infinity problem behind
//! the LP discriminant.

use hdlda::lp::{solve_l1_linf, solve_standard, StandardLp};
use hdlda::numerics::Mat;

fn main() -> anyhow::Result<()> {
    // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18
    let lp = StandardLp::new(vec![-3.0, -5.0], Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]])?, vec![4.0, 12.0, 18.0])?;
    let sol = solve_standard(&lp, lp.default_max_iters());
    println!("{:?}: z = {:?}, objective {} after {} pivots", sol.status, sol.z, -sol.objective_value, sol.iterations);

    // z <= -2 with z >= 0
    let infeasible = StandardLp::new(vec![1.0], Mat::from_rows(&[vec![1.0]])?, vec![-2.0])?;
    println!("infeasible: {:?}", solve_standard(&infeasible, 50).status);
    // min -z with only z >= 0
    let unbounded = StandardLp::new(vec![-1.0], Mat::from_rows(&[vec![-1.0]])?, vec![0.0])?;
    println!("unbounded: {:?}\n", solve_standard(&unbounded, 50).status);

    let a = Mat::from_rows(&[vec![1.0, 0.5, 0.0], vec![0.5, 1.0, 0.5], vec![0.0, 0.5, 1.0]])?;
    let d = [1.0, 0.2, -0.6];
    for lambda in [0.05, 0.3, 1.0] {
        let beta = solve_l1_linf(&a, &d, lambda)?;
        println!("lambda = {lambda:<4}  beta = {:>8.4?}", beta);
    }
    Ok(())
}
