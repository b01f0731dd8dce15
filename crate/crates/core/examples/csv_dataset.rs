//! Round trip through the CSV data format: write a sample, read it back,
//! fit, and save predictions.

use hdlda::classifiers::{evaluate, fit, Method, Params};
use hdlda::dataset::{write_predictions, DatasetCsv};
use hdlda::numerics::rng_stream;
use hdlda::population::{make_sim_model, sample_dataset};

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("hdlda-csv-example");
    std::fs::create_dir_all(&dir)?;
    let truth = make_sim_model(1, 20, 3)?;
    let train_path = dir.join("train.csv");
    DatasetCsv::from_sample(&sample_dataset(&truth, 40, &mut rng_stream(3, 0))).write(&train_path)?;

    let csv = DatasetCsv::read(&train_path)?;
    println!("{} rows, features {}..{}", csv.x.rows(), csv.features[0], csv.features[csv.features.len() - 1]);
    let train = csv.to_sample()?;
    let model = fit(Method::Glda, &train, &Params::default())?;

    let test = sample_dataset(&truth, 100, &mut rng_stream(3, 1));
    println!("test error {:.4}", evaluate(&model, &test)?.error_rate);

    let pred_path = dir.join("predictions.csv");
    write_predictions(std::fs::File::create(&pred_path)?, &model.predict_all(&test.x))?;
    std::fs::write(dir.join("model.json"), model.to_json())?;
    println!("wrote {} and model.json to {}", pred_path.display(), dir.display());
    Ok(())
}
