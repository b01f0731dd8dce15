//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use hdlda::classifiers::{fit, ClassifierModel, Method, Params};
use hdlda::estimators::sparsity_and_rates;
use hdlda::lp::{solve_l1_linf, solve_standard, LpStatus};
use hdlda::numerics::{bvn_lower_cdf, cholesky, default_pinv_tol, pinv, rng_stream, Mat};
use hdlda::population::{make_sim_model, r_opt, sample_dataset};
use hdlda::simharness::{convergence_experiment, run_experiment, ConvergenceConfig, ExperimentConfig, ExperimentResult};
use hdlda::theory::{bound_with_mc, example_bounds, k2_equality_value, pair_geometry};
use hdlda::tuning::{default_lambdas, grid_search, Grid};

use common::*;

/// Φ from the complementary error function, independent of the crate's Φ.
fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn desk_run(model_id: u8, seed: u64, methods: Vec<Method>) -> ExperimentResult {
    let mut cfg = ExperimentConfig::new(model_id, 300, 3);
    cfg.reps = 10;
    cfg.master_seed = seed;
    cfg.methods = methods;
    run_experiment(&cfg, 0).expect("experiment runs")
}

fn criterion_1() -> Outcome {
    let targets = [
        (Method::Opt, 0.023, 0.010),
        (Method::Glda, 0.197, 0.040),
        (Method::Lpd, 0.027, 0.015),
        (Method::Slda2, 0.067, 0.035),
        (Method::Nsc, 0.052, 0.035),
    ];
    let r = desk_run(1, 1, targets.iter().map(|t| t.0).collect());
    let mut pass = true;
    let mut parts = vec![format!("LPD grid {:?}", default_lambdas())];
    for (m, target, tol) in targets {
        let a = r.aggregate(m).unwrap();
        let ok = a.reps_used == 10 && (a.mean_error - target).abs() <= tol;
        pass &= ok;
        parts.push(format!("{m} {:.4} (sd {:.4}) vs {target}±{tol}", a.mean_error, a.sd_error));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let order = [Method::Opt, Method::Lpd, Method::Slda2, Method::Glda, Method::Nsc];
    let r = desk_run(3, 2, order.to_vec());
    let mut pass = true;
    let mut parts = vec![];
    for w in order.windows(2) {
        let (a, b) = (r.aggregate(w[0]).unwrap(), r.aggregate(w[1]).unwrap());
        let se = (a.sd_error.powi(2) / a.reps_used as f64 + b.sd_error.powi(2) / b.reps_used as f64).sqrt();
        let gap = b.mean_error - a.mean_error;
        let ok = gap > 2.0 * se;
        pass &= ok;
        parts.push(format!(
            "{} {:.4} < {} {:.4} (gap {:.4}, 2SE {:.4}){}",
            w[0],
            a.mean_error,
            w[1],
            b.mean_error,
            gap,
            2.0 * se,
            if ok { "" } else { " !" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let mut rng = rng_stream(3, 0);
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let p = 1 + rng.below(10);
        let sep = 0.5 + 2.5 * rng.uniform();
        let pop = random_population(&mut rng, 2, p, sep);
        let delta: Vec<f64> = pop.mean(1).iter().zip(pop.mean(2)).map(|(a, b)| a - b).collect();
        let sol = solve_dense(pop.sigma().to_rows(), delta.clone()).unwrap();
        let maha: f64 = delta.iter().zip(&sol).map(|(a, b)| a * b).sum::<f64>().sqrt();
        let closed = phi(-maha / 2.0);
        let est = r_opt(&pop, 200_000, &mut rng_stream(3, 1 + t)).unwrap();
        let se = (closed * (1.0 - closed) / est.samples as f64).sqrt();
        worst = worst.max((est.estimate - closed).abs() / se);
    }
    outcome(worst <= 4.0, format!("20 instances, max |MC − Φ(−Δ/2)| = {worst:.2} SE (limit 4)"))
}

fn criterion_4() -> Outcome {
    let mut rng = rng_stream(4, 0);
    let mut pass = true;
    let (mut checks, mut k2_checks) = (0, 0);
    let mut worst_bound: f64 = f64::NEG_INFINITY;
    let mut worst_k2: f64 = 0.0;
    for inst in 0..20u64 {
        let k = [2, 3, 4][inst as usize % 3];
        let p = 2 + rng.below(19);
        let n = if inst % 2 == 0 { 100 } else { 400 };
        let sep = 1.5 + rng.uniform();
        let truth = Arc::new(random_population(&mut rng, k, p, sep));
        let opt = ClassifierModel::opt(truth.clone());
        let mut drng = rng_stream(4, 100 + inst);
        let train = sample_dataset(&truth, n / k, &mut drng);
        for method in [Method::Glda, Method::Slda2, Method::Lpd] {
            let params = if method.is_tunable() {
                let grid = Grid::for_data(method, &train).unwrap();
                grid_search(method, &train, &grid, 5, &mut drng).unwrap().best_params
            } else {
                Params::default()
            };
            let model = fit(method, &train, &params).unwrap();
            let rep = bound_with_mc(&truth, &model, &opt, 200_000, &mut rng_stream(4, 1000 + inst)).unwrap();
            let (gap, se) = (rep.gap_est.unwrap(), rep.gap_se.unwrap());
            let slack = (gap - 3.0 * se - rep.bound) / se.max(1e-12);
            worst_bound = worst_bound.max(slack);
            pass &= rep.bound >= gap - 3.0 * se;
            checks += 1;
            if k == 2 {
                let value = k2_equality_value(&pair_geometry(&truth, &model).unwrap()).unwrap();
                let z = (value - gap).abs() / se.max(1e-12);
                worst_k2 = worst_k2.max(z);
                pass &= (value - gap).abs() <= 3.0 * se;
                k2_checks += 1;
            }
        }
    }
    outcome(
        pass,
        format!("{checks} bound checks (max violation margin {worst_bound:.2} SE, must be ≤ 0); {k2_checks} K=2 equality checks (max |residual| {worst_k2:.2} SE, limit 3)"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = rng_stream(5, 0);
    let mut mismatches = 0;
    let mut counts = [0usize; 3];
    for _ in 0..200 {
        let (m, q) = (1 + rng.below(6), 1 + rng.below(6));
        let lp = random_lp(&mut rng, m, q);
        let sol = solve_standard(&lp, lp.default_max_iters());
        let ok = match vertex_oracle(&lp) {
            LpOracle::Optimal(v) => {
                counts[0] += 1;
                sol.status == LpStatus::Optimal && (sol.objective_value - v).abs() <= 1e-8
            }
            LpOracle::Infeasible => {
                counts[1] += 1;
                sol.status == LpStatus::Infeasible
            }
            LpOracle::Unbounded => {
                counts[2] += 1;
                sol.status == LpStatus::Unbounded
            }
        };
        mismatches += usize::from(!ok);
    }
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = 1 + rng.below(8);
        let d: Vec<f64> = (0..p).map(|_| 2.0 * rng.normal()).collect();
        let lambda = 0.05 + 2.0 * rng.uniform();
        let beta = solve_l1_linf(&Mat::identity(p), &d, lambda).unwrap();
        for (b, dk) in beta.iter().zip(&d) {
            worst = worst.max((b - dk.signum() * (dk.abs() - lambda).max(0.0)).abs());
        }
    }
    outcome(
        mismatches == 0 && worst <= 1e-8,
        format!(
            "standard form: {mismatches} mismatches over 200 ({} optimal, {} infeasible, {} unbounded); soft-threshold max error {worst:.1e}",
            counts[0], counts[1], counts[2]
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = rng_stream(6, 0);
    let mut penrose: f64 = 0.0;
    for t in 0..100 {
        let p = 2 + rng.below(11);
        let a = random_symmetric_rank(&mut rng, p, 1 + t % p);
        penrose = penrose.max(penrose_residual(&a, &pinv(&a, default_pinv_tol(p)).unwrap()));
    }
    let mut chol: f64 = 0.0;
    for _ in 0..100 {
        let p = 1 + rng.below(12);
        let a = random_spd(&mut rng, p, 0.1);
        let l = cholesky(&a).unwrap();
        chol = chol.max(l.mul_self_transpose().sub(&a).max_abs());
    }
    let mut orthant: f64 = 0.0;
    for i in -9..=9 {
        let r = i as f64 / 10.0;
        orthant = orthant.max((bvn_lower_cdf(0.0, 0.0, r).unwrap() - (0.25 + r.asin() / (2.0 * PI))).abs());
    }
    // 10⁷ standard normal pairs shared by all triples: V = ρU + √(1−ρ²)W.
    let n = 10_000_000;
    let mut zrng = rng_stream(6, 1);
    let u: Vec<f64> = (0..n).map(|_| zrng.normal()).collect();
    let w: Vec<f64> = (0..n).map(|_| zrng.normal()).collect();
    let mut mc_worst: f64 = 0.0;
    for _ in 0..50 {
        let h = 4.0 * rng.uniform() - 2.0;
        let k = 4.0 * rng.uniform() - 2.0;
        let r = 1.98 * rng.uniform() - 0.99;
        let c = (1.0 - r * r).sqrt();
        let hits = u.iter().zip(&w).filter(|(&a, &b)| a <= h && r * a + c * b <= k).count();
        let est = hits as f64 / n as f64;
        let exact = bvn_lower_cdf(h, k, r).unwrap();
        let se = (exact * (1.0 - exact) / n as f64).sqrt().max(1e-12);
        mc_worst = mc_worst.max((est - exact).abs() / se);
    }
    let pass = penrose < 1e-8 && chol < 1e-10 && orthant < 1e-7 && mc_worst <= 3.0;
    outcome(pass, format!("Penrose {penrose:.1e} (<1e-8); Cholesky {chol:.1e} (<1e-10); orthant {orthant:.1e} (<1e-7); MC max {mc_worst:.2} SE (≤3)"))
}

fn criterion_7() -> Outcome {
    let cfg = ConvergenceConfig {
        method: Method::Slda2,
        n_grid: vec![200, 400, 800, 1600],
        reps: 10,
        master_seed: 7,
        mc_samples: 300_000,
        cv_folds: 5,
        grid: None,
    };
    let t = convergence_experiment(&cfg, |_| make_sim_model(3, 100, 3), 0).unwrap();
    let last = t.points.last().unwrap().mean_ratio;
    let table: Vec<String> = t.points.iter().map(|p| format!("n={} {:.3}", p.n, p.mean_ratio)).collect();
    outcome(
        t.spearman <= -0.8 && last < 0.5,
        format!("mean R/R_OPT − 1: {}; Spearman {:.2} (≤ −0.8); last {last:.3} (< 0.5)", table.join(", "), t.spearman),
    )
}

fn criterion_8() -> Outcome {
    let model = make_sim_model(1, 300, 3).unwrap();
    let r = sparsity_and_rates(&model, 450, 3, 0.5, 0.5, 0.3, 2.0, 1.0).unwrap();
    // Compound symmetry with ρ = 1/2: Σ⁻¹v = 2v whenever 1ᵀv = 0, and each
    // mean difference has five +1 and five −1 entries, so δᵀΣ⁻¹δ = 2·10.
    let m: f64 = 20.0;
    let d = 10.0;
    let (p, n, k): (f64, f64, f64) = (300.0, 450.0, 3.0);
    let s_n = p * (p.ln() / n).sqrt() + k / m.sqrt() * (p / n).sqrt();
    let errs = [(r.m_min - m).abs(), (r.m_max - m).abs(), (r.d_gp - d).abs(), (r.s_n - s_n).abs()];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= 1e-6 && (s_n - 34.3).abs() < 0.05,
        format!("M_min {} M_max {} D {} s_n {:.6} (oracle {s_n:.6}); max error {worst:.1e}", r.m_min, r.m_max, r.d_gp, r.s_n),
    )
}

fn criterion_9() -> Outcome {
    let grid: Vec<f64> = (1..=10).map(|i| 2.0 * i as f64).collect();
    let vals: Vec<_> = grid.iter().map(|&d| example_bounds(d, 4.0 / d.sqrt()).unwrap()).collect();
    // 1/Φ(d/2) rounds to exactly 1 once Φ(d/2) does, so monotone means non-increasing.
    let ratio_down = vals.windows(2).all(|w| w[1].upper_ratio_bound <= w[0].upper_ratio_bound)
        && vals[0].upper_ratio_bound > vals[vals.len() - 1].upper_ratio_bound
        && vals.iter().all(|v| v.upper_ratio_bound >= 1.0);
    let mixing_down = vals.windows(2).all(|w| w[1].mixing_bound < w[0].mixing_bound) && vals.iter().all(|v| v.mixing_bound > 0.0);
    let last = vals.last().unwrap();
    let ratio_tail = last.upper_ratio_bound - 1.0 < 1e-10;
    let mixing_tail = last.mixing_bound < (-20f64).exp() * 1.01;
    outcome(
        ratio_down && mixing_down && ratio_tail && mixing_tail,
        format!(
            "ratio bound decreasing: {ratio_down}; mixing bound decreasing: {mixing_down}; at d=20 ratio−1 = {:.2e} (<1e-10: {ratio_tail}); mixing = {:.3e} vs e^-20·1.01 = {:.3e} ({mixing_tail})",
            last.upper_ratio_bound - 1.0,
            last.mixing_bound,
            (-20f64).exp() * 1.01
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(format!("{name}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_hdlda"))
            .args(["simulate", "--model", "1", "--p", "60", "--k", "3", "--reps", "4", "--seed", "10"])
            .args(["--n-train", "90", "--n-test", "90", "--methods", "opt,glda,slda1,slda2,lpd,nsc"])
            .args(["--workers", workers, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let agg = dir.path().join(format!("{name}_aggregates.csv"));
        (std::fs::read(out).unwrap(), std::fs::read(agg).unwrap())
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "8");
    let pass = a == b && a == c && !a.0.is_empty();
    outcome(pass, format!("repeat identical: {}; 1 vs 8 workers identical: {}", a == b, a == c))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Model 1 desk-scale error rates", criterion_1),
        ("Model 3 method ordering", criterion_2),
        ("two-class optimal error closed form", criterion_3),
        ("misclassification-gap bound and K=2 equality", criterion_4),
        ("LP solver oracle equivalence", criterion_5),
        ("numerics suite", criterion_6),
        ("SLDA2 convergence trend", criterion_7),
        ("rate arithmetic", criterion_8),
        ("parallel-boundary example", criterion_9),
        ("simulate determinism", criterion_10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = vec![];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict}  {name} [{:.1}s]: {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
