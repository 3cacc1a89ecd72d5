//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p stable-ecf --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stable_ecf::{
    build_poly_design, cf_modulus_sq, k_sweep, log_moment, power_moment, quadrature_oracle, run_simulation,
    run_simulation_with, Estimator, ExactCf, Execution, InfiniteLs, IntervalDesign, Method, SimConfig, StableParams,
    StableSampler, Target,
};

const ACCEPTANCE_REPS: usize = 2000;
const SEED: u64 = 20_250_101;

struct Check {
    what: String,
    pass: bool,
}

fn check(pass: bool, what: impl Into<String>) -> Check {
    Check { what: what.into(), pass }
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

fn budget(elapsed: Duration, limit_s: f64) -> Check {
    check(elapsed.as_secs_f64() < limit_s, format!("runtime {:.2} s < {limit_s} s", elapsed.as_secs_f64()))
}

fn sim_config(alphas: Vec<f64>, n: usize, methods: Vec<Method>) -> SimConfig {
    SimConfig {
        alphas,
        sample_sizes: vec![n],
        replications: ACCEPTANCE_REPS,
        methods,
        x0: 0.1,
        d: 1.9,
        k: 500,
        base_seed: SEED,
        ..SimConfig::default()
    }
}

fn ac1_analytic_line() -> Vec<Check> {
    let start = Instant::now();
    let p = StableParams::symmetric(1.5, 1.0).unwrap();
    let err = |k| {
        let est =
            InfiniteLs::new(IntervalDesign::new(0.1, 1.9).unwrap(), k).unwrap().fit_response(&ExactCf(p)).unwrap();
        (est.alpha_hat - 1.5).abs()
    };
    let (e500, e1000) = (err(500), err(1000));
    vec![
        check(e500 <= 2e-3, format!("|alpha_hat - 1.5| at K=500 = {e500:.6} <= 2e-3")),
        check(e500 / e1000 >= 1.8, format!("error ratio K=500/K=1000 = {:.3} >= 1.8", e500 / e1000)),
        budget(start.elapsed(), 1.0),
    ]
}

fn ac2_design_oracle() -> Vec<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_moment: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for _ in 0..200 {
        let x0 = rng.random_range(0.01..5.0);
        let d = rng.random_range(0.1..10.0);
        let g = IntervalDesign::new(x0, d).unwrap();
        for m in 1..=2u32 {
            let closed = log_moment(&g, m).unwrap();
            let q = quadrature_oracle(|t| t.ln().powi(m as i32), &g).unwrap();
            worst_moment = worst_moment.max(((closed - q) / q).abs());
        }
        for m in 0..=4u32 {
            let closed = power_moment(&g, m);
            let q = quadrature_oracle(|t| t.powi(m as i32), &g).unwrap();
            worst_moment = worst_moment.max(((closed - q) / q).abs());
        }
        let det = build_poly_design(&g, 1).unwrap().determinant();
        worst_det = worst_det.max(((det - d * d / 12.0) / (d * d / 12.0)).abs());
    }
    vec![
        check(worst_moment <= 1e-10, format!("max relative moment error vs quadrature = {worst_moment:.2e} <= 1e-10")),
        check(worst_det <= 1e-14, format!("max relative |det - d^2/12| = {worst_det:.2e} <= 1e-14")),
        budget(start.elapsed(), 5.0),
    ]
}

fn ac3_k_sweep() -> Vec<Check> {
    let start = Instant::now();
    let cfg = sim_config(vec![1.5], 100, vec![Method::InfiniteLs]);
    let report = k_sweep(&cfg, &[100, 300, 500]).unwrap();
    let row = |k| report.rows.iter().find(|r| r.sweep_k == Some(k)).unwrap();
    let (r100, r500) = (row(100), row(500));
    for r in &report.rows {
        println!("      K={:<4} mean {:.4} bias {:+.4} mse {:.4}", r.sweep_k.unwrap(), r.mean, r.bias, r.mse);
    }
    vec![
        check(within(r500.mse, 0.019, 0.029), format!("MSE(K=500) = {:.4} in [0.019, 0.029]", r500.mse)),
        check(r500.bias.abs() <= 0.02, format!("|bias(K=500)| = {:.4} <= 0.02", r500.bias.abs())),
        check(r500.mse <= r100.mse, format!("MSE(K=500) {:.4} <= MSE(K=100) {:.4}", r500.mse, r100.mse)),
        budget(start.elapsed(), 180.0),
    ]
}

fn ac4_small_n() -> Vec<Check> {
    let start = Instant::now();
    let cfg = sim_config(vec![1.3], 30, vec![Method::InfiniteLs, Method::KogonWilliams]);
    let report = run_simulation(&cfg).unwrap();
    let ls = report.find(Method::InfiniteLs, 1.3, 30).unwrap();
    let kw = report.find(Method::KogonWilliams, 1.3, 30).unwrap();
    println!("      infinite-ls    mean {:.4} bias {:+.4} mse {:.4}", ls.mean, ls.bias, ls.mse);
    println!("      kogon-williams mean {:.4} bias {:+.4} mse {:.4}", kw.mean, kw.bias, kw.mse);
    println!("      info: kogon-williams mean is {} the true alpha", if kw.mean > 1.3 { "above" } else { "below" });
    vec![
        check(
            ls.mse < 0.75 * kw.mse,
            format!(
                "MSE(infinite-ls) {:.4} < 0.75 x MSE(kogon-williams) {:.4} (ratio {:.3})",
                ls.mse,
                kw.mse,
                ls.mse / kw.mse
            ),
        ),
        check(within(ls.bias, -0.05, 0.07), format!("infinite-ls bias {:+.4} in [-0.05, +0.07]", ls.bias)),
        check(kw.bias < 0.0, format!("kogon-williams bias (mean - truth) {:+.4} < 0", kw.bias)),
        budget(start.elapsed(), 120.0),
    ]
}

fn ac5_alpha_spots() -> Vec<Check> {
    let start = Instant::now();
    let cfg = sim_config(vec![1.9, 1.5], 100, vec![Method::InfiniteLs, Method::KogonWilliams]);
    let report = run_simulation(&cfg).unwrap();
    let ls = report.find(Method::InfiniteLs, 1.5, 100).unwrap();
    let kw = report.find(Method::KogonWilliams, 1.9, 100).unwrap();
    vec![
        check(within(ls.mean, 1.48, 1.52), format!("infinite-ls alpha=1.5 mean {:.4} in [1.48, 1.52]", ls.mean)),
        check(within(ls.mse, 0.019, 0.029), format!("infinite-ls alpha=1.5 MSE {:.4} in [0.019, 0.029]", ls.mse)),
        check(within(kw.mse, 0.010, 0.017), format!("kogon-williams alpha=1.9 MSE {:.4} in [0.010, 0.017]", kw.mse)),
        budget(start.elapsed(), 180.0),
    ]
}

fn ac6_sigma_spot() -> Vec<Check> {
    let start = Instant::now();
    let mut cfg = sim_config(vec![1.5], 100, vec![Method::InfiniteLs]);
    cfg.target = Target::Sigma;
    let report = run_simulation(&cfg).unwrap();
    let ls = report.find(Method::InfiniteLs, 1.5, 100).unwrap();
    vec![
        check(within(ls.mean, 0.955, 0.99), format!("infinite-ls sigma mean {:.4} in [0.955, 0.99]", ls.mean)),
        check(within(ls.mse, 0.008, 0.015), format!("infinite-ls sigma MSE {:.4} in [0.008, 0.015]", ls.mse)),
        budget(start.elapsed(), 120.0),
    ]
}

fn ac7_sampler() -> Vec<Check> {
    let start = Instant::now();
    let n = 100_000;
    let draw = |alpha: f64, seed: u64| {
        StableSampler::new(StableParams::symmetric(alpha, 1.0).unwrap(), seed, 0).unwrap().draw(n).unwrap()
    };
    let mut out = Vec::new();

    let xs = draw(2.0, SEED);
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    out.push(check(((var - 2.0) / 2.0).abs() <= 0.05, format!("alpha=2 variance {var:.4} within 5% of 2")));

    let mut xs = draw(1.0, SEED + 1);
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| xs[(p * (n - 1) as f64).round() as usize];
    let (q1, q3) = (q(0.25), q(0.75));
    out.push(check(
        (q1 + 1.0).abs() <= 0.03 && (q3 - 1.0).abs() <= 0.03,
        format!("alpha=1 quartiles ({q1:.4}, {q3:.4}) within 0.03 of (-1, 1)"),
    ));

    for (i, alpha) in [0.7, 1.5].into_iter().enumerate() {
        let p = StableParams::symmetric(alpha, 1.0).unwrap();
        let xs = draw(alpha, SEED + 10 + i as u64);
        for t in [0.5, 1.0] {
            let c = xs.iter().map(|x| (t * x).cos()).sum::<f64>() / n as f64;
            let s = xs.iter().map(|x| (t * x).sin()).sum::<f64>() / n as f64;
            let g: Vec<f64> = xs.iter().map(|x| 2.0 * c * (t * x).cos() + 2.0 * s * (t * x).sin()).collect();
            let gm = g.iter().sum::<f64>() / n as f64;
            let se = (g.iter().map(|v| (v - gm).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt();
            let (v, exact) = (c * c + s * s, cf_modulus_sq(&p, t).unwrap());
            out.push(check(
                (v - exact).abs() <= 3.0 * se,
                format!(
                    "alpha={alpha} t={t}: |phi_n|^2 {v:.5} vs {exact:.5}, |diff| {:.2e} <= 3 se {:.2e}",
                    (v - exact).abs(),
                    3.0 * se
                ),
            ));
        }
    }
    out.push(budget(start.elapsed(), 10.0));
    out
}

fn ac8_determinism() -> Vec<Check> {
    let start = Instant::now();
    let mut cfg = sim_config(vec![1.9, 1.1], 50, Method::ALL.to_vec());
    cfg.replications = 500;
    let a = run_simulation_with(&cfg, Execution::Parallel).unwrap();
    let b = run_simulation_with(&cfg, Execution::Parallel).unwrap();
    let s = run_simulation_with(&cfg, Execution::Serial).unwrap();
    let bits = |r: &stable_ecf::SimRow| [r.mean, r.bias, r.mse, r.variance, r.clamp_rate].map(f64::to_bits);
    let same = |x: &stable_ecf::SimReport, y: &stable_ecf::SimReport| {
        x.rows.len() == y.rows.len() && x.rows.iter().zip(&y.rows).all(|(p, q)| bits(p) == bits(q) && p == q)
    };
    vec![
        check(same(&a, &b), "repeated runs are bitwise identical"),
        check(same(&a, &s), "serial and parallel runs are bitwise identical"),
        budget(start.elapsed(), 60.0),
    ]
}

fn ac9_scope() -> Vec<Check> {
    vec![check(
        ACCEPTANCE_REPS == 2000,
        "tolerance bands in AC3-AC6 are evaluated at 2000 replications; exact table values are not a target",
    )]
}

type Criterion = (&'static str, &'static str, fn() -> Vec<Check>);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1", "analytic-line recovery", ac1_analytic_line),
        ("AC2", "design-moment oracle equivalence", ac2_design_oracle),
        ("AC3", "K sweep at desk scale", ac3_k_sweep),
        ("AC4", "n=30 dominance over Kogon-Williams", ac4_small_n),
        ("AC5", "n=100 alpha spot checks", ac5_alpha_spots),
        ("AC6", "n=100 sigma spot check", ac6_sigma_spot),
        ("AC7", "sampler validity", ac7_sampler),
        ("AC8", "determinism and parallel equivalence", ac8_determinism),
        ("AC9", "reproducible in distribution only", ac9_scope),
    ];
    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        let checks = run();
        let pass = checks.iter().all(|c| c.pass);
        println!("[{}] {id} {title}", if pass { "PASS" } else { "FAIL" });
        for c in &checks {
            println!("    {} {}", if c.pass { "ok  " } else { "FAIL" }, c.what);
        }
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("\nall acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("\nfailed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
