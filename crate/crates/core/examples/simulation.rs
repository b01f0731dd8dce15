//! A small run of the seeded simulation protocol, written to CSV.

use hdlda::classifiers::Method;
use hdlda::simharness::{run_experiment, write_aggregates, write_results_csv, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let mut config = ExperimentConfig::new(1, 100, 3);
    config.n_train = 150;
    config.n_test = 300;
    config.reps = 4;
    config.methods = vec![Method::Opt, Method::Glda, Method::Lpd, Method::Nsc];
    config.master_seed = 2024;

    let result = run_experiment(&config, 0)?;
    write_aggregates(&result.aggregates, std::io::stdout())?;

    let dir = std::env::temp_dir().join("hdlda-simulation-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("results.csv");
    write_results_csv(&result, &path)?;
    println!("\n{} rows written to {}", result.rows.len(), path.display());
    Ok(())
}
