//! Relative excess error of the LP rule as the training size grows, with the
//! dimension growing alongside.

use hdlda::classifiers::Method;
use hdlda::population::make_sim_model;
use hdlda::simharness::{convergence_experiment, ConvergenceConfig};

fn main() -> anyhow::Result<()> {
    let config =
        ConvergenceConfig { method: Method::Lpd, n_grid: vec![60, 120, 240], reps: 3, master_seed: 11, mc_samples: 30_000, cv_folds: 3, grid: None };
    let table = convergence_experiment(&config, |n| make_sim_model(1, n / 2, 3), 0)?;
    println!("    n    p   R_T/R_OPT - 1");
    for pt in &table.points {
        println!("{:>5} {:>4}   {:.3} (sd {:.3})", pt.n, pt.p, pt.mean_ratio, pt.sd_ratio);
    }
    println!("spearman(n, ratio) = {:.2}", table.spearman);
    Ok(())
}
