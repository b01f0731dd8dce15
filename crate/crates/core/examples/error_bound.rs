//! Upper bound on the excess misclassification rate of fitted linear rules,
//! checked against a paired Monte Carlo estimate, plus the exact two-class
//! identity.

use std::sync::Arc;

use hdlda::classifiers::{fit, ClassifierModel, Method, Params};
use hdlda::numerics::{rng_stream, Mat};
use hdlda::population::{sample_dataset, PopulationModel};
use hdlda::theory::{bound_with_mc, k2_equality_check};

fn main() -> anyhow::Result<()> {
    let p = 30;
    let means = Mat::from_fn(3, p, |i, c| if i > 0 && c < 5 && (c + i) % 2 == 0 { 1.2 } else { 0.0 });
    let sigma = Mat::from_fn(p, p, |i, j| 0.4f64.powi(i.abs_diff(j) as i32));
    let truth = PopulationModel::new(means, sigma)?;
    let opt = ClassifierModel::opt(Arc::new(truth.clone()));
    let train = sample_dataset(&truth, 25, &mut rng_stream(2, 0));

    println!("method  bound    R_T - R_OPT (± se)");
    for (method, params) in [(Method::Glda, Params::default()), (Method::Lpd, Params::lpd(0.3)), (Method::Nsc, Params::nsc(0.8))] {
        let model = fit(method, &train, &params)?;
        let rep = bound_with_mc(&truth, &model, &opt, 100_000, &mut rng_stream(2, 1))?;
        println!("{method:<7} {:.4}   {:.4} ± {:.4}", rep.bound, rep.gap_est.unwrap(), rep.gap_se.unwrap());
    }

    let two = PopulationModel::new(Mat::from_rows(&[vec![0.0; 4], vec![1.0, 1.0, 0.0, 0.0]])?, Mat::identity(4))?;
    let opt2 = ClassifierModel::opt(Arc::new(two.clone()));
    let model = fit(Method::Glda, &sample_dataset(&two, 15, &mut rng_stream(2, 2)), &Params::default())?;
    let check = k2_equality_check(&two, &model, &opt2, 200_000, &mut rng_stream(2, 3))?;
    println!("\nK = 2: identity gives {:.5}, Monte Carlo {:.5} ± {:.5}", check.equality_value, check.mc_gap.estimate, check.mc_gap.std_error);
    Ok(())
}
