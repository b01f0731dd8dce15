//! Fits every rule on one training sample and compares test error with the
//! conditional error under the true population.

use std::sync::Arc;

use hdlda::classifiers::{conditional_error, evaluate, fit, ClassifierModel, Method, Params};
use hdlda::numerics::rng_stream;
use hdlda::population::{make_sim_model, sample_dataset};

fn main() -> anyhow::Result<()> {
    let truth = make_sim_model(1, 200, 3)?;
    let mut rng = rng_stream(5, 0);
    let train = sample_dataset(&truth, 150, &mut rng);
    let test = sample_dataset(&truth, 150, &mut rng);

    let rules = [
        ClassifierModel::opt(Arc::new(truth.clone())),
        fit(Method::Glda, &train, &Params::default())?,
        fit(Method::Slda1, &train, &Params::slda1(2.0, 1.0, 0.3))?,
        fit(Method::Slda2, &train, &Params::slda2(2.0, 1.0, 0.3, 0.5))?,
        fit(Method::Lpd, &train, &Params::lpd(0.4))?,
        fit(Method::Nsc, &train, &Params::nsc(1.0))?,
    ];
    println!("method  test error  conditional error");
    for rule in &rules {
        let report = evaluate(rule, &test)?;
        let cond = conditional_error(rule, &truth, 30_000, &mut rng_stream(5, 1))?;
        println!("{:<7} {:>10.4}  {:.4} ± {:.4}", rule.method(), report.error_rate, cond.estimate, cond.std_error);
    }

    let report = evaluate(&rules[4], &test)?;
    println!("\nlpd confusion (rows = true class): {:?}", report.confusion);
    Ok(())
}
