//! Regularity diagnostics, sparsity rates and the optimal error rate for the
//! built-in simulation models.

use hdlda::estimators::sparsity_and_rates;
use hdlda::numerics::rng_stream;
use hdlda::population::{check_conditions, make_sim_model, r_opt, sim_model_sparsity};

fn main() -> anyhow::Result<()> {
    let (p, k, n) = (300, 3, 450);
    println!("model  s   lambda_min  lambda_max   M_min    M_max    R_OPT (± se)");
    for id in 1..=3u8 {
        let pop = make_sim_model(id, p, k)?;
        let cond = check_conditions(&pop, None);
        let r = r_opt(&pop, 60_000, &mut rng_stream(0, id as u64))?;
        println!(
            "{id:>5}  {:<3} {:>10.4} {:>11.4} {:>8.3} {:>8.3}   {:.4} ± {:.4}",
            sim_model_sparsity(id).unwrap_or(0),
            cond.lambda_min,
            cond.lambda_max,
            cond.m_min,
            cond.m_max,
            r.estimate,
            r.std_error
        );
    }

    let pop = make_sim_model(2, p, k)?;
    let rates = sparsity_and_rates(&pop, n, k, 0.5, 0.5, 0.3, 2.0, 1.0)?;
    println!("\nmodel 2 at n = {n}: {}", serde_json::to_string_pretty(&rates)?);
    Ok(())
}
