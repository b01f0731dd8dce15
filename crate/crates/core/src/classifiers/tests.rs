use super::*;
use crate::numerics::rng_stream;
use crate::population::{make_sim_model, r_opt, sample_dataset};

fn toy(p: usize, n_per: usize, seed: u64) -> (Arc<PopulationModel>, LabeledSample) {
    let m = Arc::new(make_sim_model(3, p.max(30), 3).unwrap());
    let d = sample_dataset(&m, n_per, &mut rng_stream(seed, 0));
    (m, d)
}

fn slda1() -> Params {
    Params::slda1(0.1, 0.01, 0.3)
}

fn all_fitted(d: &LabeledSample) -> Vec<ClassifierModel> {
    vec![
        fit(Method::Glda, d, &Params::default()).unwrap(),
        fit(Method::Slda1, d, &slda1()).unwrap(),
        fit(Method::Slda2, d, &Params::slda2(0.5, 0.1, 0.3, 1e-2)).unwrap(),
        fit(Method::Lpd, d, &Params::lpd(0.3)).unwrap(),
        fit(Method::Nsc, d, &Params::nsc(0.5)).unwrap(),
    ]
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("qda".parse::<Method>().is_err());
}

#[test]
fn glda_own_mean_is_own_class() {
    let (_, d) = toy(30, 40, 1);
    let g = fit(Method::Glda, &d, &Params::default()).unwrap();
    let ClassifierModel::Glda(r) = &g else { panic!() };
    for i in 1..=3 {
        assert_eq!(g.predict(r.class_means.row(i - 1)), i);
    }
}

#[test]
fn lpd_scores_are_exactly_antisymmetric() {
    let (_, d) = toy(30, 40, 2);
    let ClassifierModel::Lpd(r) = fit(Method::Lpd, &d, &Params::lpd(0.25)).unwrap() else { panic!() };
    assert!(r.betas_to_1.row(0).iter().all(|&v| v == 0.0));
    let mut rng = rng_stream(2, 1);
    for _ in 0..200 {
        let x: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        let s = r.pairwise_scores(&x);
        for j in 0..3 {
            for i in (0..3).filter(|&i| i != j) {
                assert_eq!(s[(j, i)].to_bits(), (-s[(i, j)]).to_bits());
            }
        }
    }
}

#[test]
fn lpd_scores_match_direct_formula() {
    let (_, d) = toy(30, 40, 3);
    let ClassifierModel::Lpd(r) = fit(Method::Lpd, &d, &Params::lpd(0.25)).unwrap() else { panic!() };
    let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
    let s = r.pairwise_scores(&x);
    for j in 1..=3 {
        for i in 1..=3 {
            if i != j {
                let mid: Vec<f64> = r.class_means.row(j - 1).iter().zip(r.class_means.row(i - 1)).map(|(a, b)| 0.5 * (a + b)).collect();
                let direct = dot(&r.beta(j, i), &sub_vec(&x, &mid));
                assert!((s[(j - 1, i - 1)] - direct).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn degenerate_fits_predict_class_one() {
    let (_, d) = toy(30, 20, 4);
    let s = fit(Method::Slda1, &d, &Params::slda1(1e6, 0.0, 0.3)).unwrap();
    let ClassifierModel::Slda(r) = &s else { panic!() };
    assert_eq!(r.omega.max_abs(), 0.0);
    let l = fit(Method::Lpd, &d, &Params::lpd(1e6)).unwrap();
    for row in 0..d.n() {
        assert_eq!(s.predict(d.x.row(row)), 1);
        assert_eq!(l.predict(d.x.row(row)), 1);
    }
    let e = evaluate(&l, &d).unwrap();
    assert!((e.error_rate - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(e.confusion[1][0], 20);
    assert_eq!(e.per_class_errors, vec![0.0, 1.0, 1.0]);
}

#[test]
fn slda_identity_is_euclidean_nearest_center() {
    let centers = Mat::from_rows(&[vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]]).unwrap();
    let r = ClassifierModel::Slda(SldaRule::new(centers.clone(), Mat::identity(2), SldaVariant::Pinv, 0.0, slda1()));
    let mut rng = rng_stream(5, 5);
    for _ in 0..500 {
        let x = [3.0 * rng.normal(), 3.0 * rng.normal()];
        let d: Vec<f64> = (0..3).map(|i| crate::numerics::norm2(&sub_vec(&x, centers.row(i)))).collect();
        assert_eq!(r.predict(&x), argmin(&d) + 1);
    }
}

#[test]
fn slda_first_center_is_first_mean() {
    let (_, d) = toy(30, 20, 6);
    let ClassifierModel::Slda(r) = fit(Method::Slda1, &d, &slda1()).unwrap() else { panic!() };
    let stats = fit_stats(&d).unwrap();
    assert_eq!(r.centers.row(0), stats.class_means.row(0));
}

#[test]
fn slda_pairwise_rule_agrees_with_argmin() {
    let (_, d) = toy(30, 40, 7);
    let m = fit(Method::Slda2, &d, &Params::slda2(0.3, 0.05, 0.3, 1e-3)).unwrap();
    let ClassifierModel::Slda(r) = &m else { panic!() };
    let mut rng = rng_stream(7, 1);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..30).map(|_| 1.5 * rng.normal() + 0.3).collect();
        let pairwise: Vec<usize> = (1..=3)
            .filter(|&i| (1..=3).filter(|&j| j != i).all(|j| dot(&r.delta(j, i), &r.omega.matvec(&sub_vec(&x, &r.midpoint(j, i)))) < 0.0))
            .collect();
        if pairwise.len() == 1 {
            assert_eq!(m.predict(&x), pairwise[0]);
        }
    }
}

#[test]
fn linear_and_quadratic_scores_agree() {
    let (pop, d) = toy(30, 40, 8);
    let mut models = all_fitted(&d);
    models.push(ClassifierModel::opt(pop));
    let mut rng = rng_stream(8, 1);
    for m in &models {
        for _ in 0..300 {
            let x: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
            if let Some(q) = m.quadratic_scores(&x) {
                assert_eq!(m.predict(&x), argmin(&q) + 1, "{}", m.method());
            }
        }
    }
}

#[test]
fn nsc_zero_shrinkage_is_diagonal_nearest_centroid() {
    let (_, d) = toy(30, 30, 9);
    let stats = nsc_stats(&d).unwrap();
    let m = fit(Method::Nsc, &d, &Params::nsc(0.0)).unwrap();
    let ClassifierModel::Nsc(r) = &m else { panic!() };
    for i in 0..3 {
        for f in 0..30 {
            assert!((r.centroids[(i, f)] - stats.class_means[(i, f)]).abs() < 1e-12);
        }
    }
    let mut rng = rng_stream(9, 2);
    for _ in 0..300 {
        let x: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        let scores: Vec<f64> = (0..3)
            .map(|i| {
                (0..30).map(|f| (x[f] - stats.class_means[(i, f)]).powi(2) / (stats.s[f] + stats.s0).powi(2)).sum::<f64>() - 2.0 * (1.0f64 / 3.0).ln()
            })
            .collect();
        assert_eq!(m.predict(&x), argmin(&scores) + 1);
    }
}

#[test]
fn nsc_large_delta_collapses_to_overall_centroid() {
    let (_, d) = toy(30, 30, 10);
    let stats = nsc_stats(&d).unwrap();
    let ClassifierModel::Nsc(r) = fit(Method::Nsc, &d, &Params::nsc(stats.max_abs_d())).unwrap() else { panic!() };
    for i in 0..3 {
        assert_eq!(r.centroids.row(i), stats.overall.as_slice());
    }
}

#[test]
fn translation_equivariance() {
    let (_, d) = toy(30, 40, 11);
    let shift: Vec<f64> = (0..30).map(|i| 0.5 + 0.1 * i as f64).collect();
    let mut shifted = d.clone();
    for r in 0..d.n() {
        for (v, s) in shifted.x.row_mut(r).iter_mut().zip(&shift) {
            *v += s;
        }
    }
    let a = all_fitted(&d);
    let b = all_fitted(&shifted);
    let mut rng = rng_stream(11, 1);
    let mut mismatches = 0;
    for _ in 0..500 {
        let x: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        let xs: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        for (ma, mb) in a.iter().zip(&b) {
            if ma.predict(&x) != mb.predict(&xs) {
                mismatches += 1;
            }
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn relabeling_equivariance() {
    let (_, d) = toy(30, 40, 12);
    // Permutations fixing class 1 keep the LP reference class, so every
    // method must permute its predictions exactly.
    let perm = [1usize, 3, 2];
    let mut relabeled = d.clone();
    relabeled.labels = d.labels.iter().map(|&l| perm[l - 1]).collect();
    let a = all_fitted(&d);
    let b = all_fitted(&relabeled);
    let mut rng = rng_stream(12, 1);
    for _ in 0..500 {
        let x: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        for (ma, mb) in a.iter().zip(&b) {
            assert_eq!(perm[ma.predict(&x) - 1], mb.predict(&x), "{}", ma.method());
        }
    }
    // A full cycle moves the reference class; centroid-type rules still permute.
    let cycle = [2usize, 3, 1];
    let mut cycled = d.clone();
    cycled.labels = d.labels.iter().map(|&l| cycle[l - 1]).collect();
    let g1 = fit(Method::Glda, &d, &Params::default()).unwrap();
    let g2 = fit(Method::Glda, &cycled, &Params::default()).unwrap();
    for _ in 0..500 {
        let x: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
        assert_eq!(cycle[g1.predict(&x) - 1], g2.predict(&x));
    }
}

#[test]
fn infeasible_lpd_fit_fails() {
    // Feature 2 is constant within classes but differs between them.
    let x = Mat::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 1.0], vec![1.5, 1.0]]).unwrap();
    let d = LabeledSample::new(x, vec![1, 1, 2, 2], 2).unwrap();
    assert_eq!(fit(Method::Lpd, &d, &Params::lpd(0.1)).unwrap_err(), Error::LpInfeasible(2));
    assert!(fit(Method::Opt, &d, &Params::default()).is_err());
    assert!(fit(Method::Lpd, &d, &Params::default()).is_err());
}

#[test]
fn evaluate_on_training_data_is_consistent() {
    let (_, d) = toy(30, 30, 13);
    for m in all_fitted(&d) {
        let e = evaluate(&m, &d).unwrap();
        let manual = (0..d.n()).filter(|&r| m.predict(d.x.row(r)) != d.labels[r]).count() as f64 / d.n() as f64;
        assert_eq!(e.error_rate, manual);
        for (i, row) in e.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<usize>(), d.counts()[i]);
        }
    }
}

#[test]
fn json_round_trip_preserves_predictions() {
    let (pop, d) = toy(30, 30, 14);
    let mut models = all_fitted(&d);
    models.push(ClassifierModel::opt(pop));
    for m in &models {
        let back = ClassifierModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back.method(), m.method());
        assert_eq!(back.params(), m.params());
        for r in 0..d.n() {
            assert_eq!(back.predict(d.x.row(r)), m.predict(d.x.row(r)));
        }
    }
    assert!(ClassifierModel::from_json(r#"{"method":"glda","k":2,"p":2,"params":{}}"#).is_err());
}

#[test]
fn opt_conditional_error_equals_r_opt() {
    let pop = Arc::new(make_sim_model(1, 40, 3).unwrap());
    let opt = ClassifierModel::opt(pop.clone());
    let a = conditional_error(&opt, &pop, 30_000, &mut rng_stream(1, 1)).unwrap();
    let b = r_opt(&pop, 30_000, &mut rng_stream(1, 1)).unwrap();
    assert_eq!(a.estimate, b.estimate);
}

#[test]
fn fitted_rules_do_not_beat_optimal() {
    let (pop, d) = toy(30, 30, 15);
    let opt = ClassifierModel::opt(pop.clone());
    let fitted = all_fitted(&d);
    let mut refs: Vec<&ClassifierModel> = vec![&opt];
    refs.extend(fitted.iter());
    let pe = paired_conditional_errors(&refs, &pop, 60_000, &mut rng_stream(15, 3)).unwrap();
    for m in 1..refs.len() {
        let g = pe.gap(m, 0);
        assert!(g.estimate >= -3.0 * g.std_error, "{}", refs[m].method());
    }
}

#[test]
fn model1_opt_test_error_scale() {
    let pop = Arc::new(make_sim_model(1, 300, 3).unwrap());
    let test = sample_dataset(&pop, 150, &mut rng_stream(21, 0));
    let e = evaluate(&ClassifierModel::opt(pop), &test).unwrap();
    assert!((e.error_rate - 0.023).abs() <= 0.02, "{}", e.error_rate);
}

#[test]
fn model1_glda_conditional_error_scale() {
    let pop = make_sim_model(1, 300, 3).unwrap();
    let train = sample_dataset(&pop, 150, &mut rng_stream(22, 0));
    let g = fit(Method::Glda, &train, &Params::default()).unwrap();
    let e = conditional_error(&g, &pop, 30_000, &mut rng_stream(22, 1)).unwrap();
    assert!((e.estimate - 0.197).abs() <= 0.05, "{}", e.estimate);
}
