//! Stratified cross-validation over the default tuning grids.

use hdlda::classifiers::Method;
use hdlda::numerics::rng_stream;
use hdlda::population::{make_sim_model, sample_dataset};
use hdlda::tuning::{grid_search, Grid};

fn main() -> anyhow::Result<()> {
    let truth = make_sim_model(3, 150, 3)?;
    let train = sample_dataset(&truth, 60, &mut rng_stream(9, 0));

    for method in [Method::Lpd, Method::Nsc, Method::Slda1] {
        let grid = Grid::for_data(method, &train)?;
        let cv = grid_search(method, &train, &grid, 5, &mut rng_stream(9, 1))?;
        println!("{method}: {} candidates, best {} with CV error {:.4}", cv.table.len(), cv.best_params.to_json(), cv.best_error);
        if method == Method::Lpd {
            for entry in &cv.table {
                let err = entry.error.map_or("fit failed".to_string(), |e| format!("{e:.4}"));
                println!("    lambda = {:<4} {err}", entry.params.lambda.unwrap_or(f64::NAN));
            }
        }
    }
    Ok(())
}
