//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use profit_rate::averages::{averages_path, cumulative_growth, self_weighted_beta, AveragingOptions};
use profit_rate::cli::{forward_rows, FORWARD_COLUMNS};
use profit_rate::dynamics::{
    beta_of, excess_duration, excess_duration_estimate, infer_sigma, new_economy_pi, EconomyInputs, Method,
    SolutionPath, Solver,
};
use profit_rate::error::Error;
use profit_rate::exec::Exec;
use profit_rate::scenarios::{scenario_constant, scenario_illustration, scenario_random};
use profit_rate::series::csv::write_table;
use profit_rate::series::{RangePolicy, Series, SeriesKind, TimeGrid};

const BETA_RANGE: (f64, f64) = (-0.02, 0.10);
const SIGMA_RANGE: (f64, f64) = (0.2, 1.0);

/// Random family for the cross-method and bound criteria.
fn random_economy(seed: u64) -> EconomyInputs {
    scenario_random(seed, 60.0, 0.5, BETA_RANGE, SIGMA_RANGE).expect("random scenario")
}

/// Random family for the identity criterion: smooth β in [-0.02, 0.08] on
/// a coarse annual-to-biennial grid, so quadrature error stays measurable
/// above rounding when the refinement doubles.
fn identity_economy(seed: u64) -> EconomyInputs {
    scenario_random(1000 + seed, 60.0, 2.0, (-0.02, 0.08), SIGMA_RANGE).expect("random scenario")
}

/// Random family for the inverse roundtrip.
fn roundtrip_economy(seed: u64) -> EconomyInputs {
    scenario_random(2000 + seed, 60.0, 0.5, BETA_RANGE, SIGMA_RANGE).expect("random scenario")
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn solve_all(inputs: &EconomyInputs, opts: &AveragingOptions) -> Result<Vec<SolutionPath>, Error> {
    let solver = Solver::new(inputs, opts)?;
    Method::ALL.iter().map(|&m| solver.solve(m)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn new_economy(beta0: f64, opts: &AveragingOptions) -> (f64, Duration) {
    timed(|| {
        let inputs = scenario_constant(beta0, 0.6, 0.0, 100.0, 0.25).unwrap();
        let solver = Solver::new(&inputs, opts).unwrap();
        let mut worst: f64 = 0.0;
        for m in [Method::Ode, Method::Quadrature] {
            let sol = solver.solve(m).unwrap();
            for (&t, &p) in sol.times().iter().zip(&sol.pi) {
                if t >= 0.5 {
                    worst = worst.max(rel(p, new_economy_pi(beta0, t).unwrap()));
                }
            }
        }
        worst
    })
}

fn criterion_1(r: &mut Report, opts: &AveragingOptions) {
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for beta0 in [0.02, 0.05, 0.10] {
        let (w, d) = new_economy(beta0, opts);
        worst = worst.max(w);
        slowest = slowest.max(d);
    }
    r.line(
        1,
        "new-economy closed form",
        worst <= 1e-6 && slowest < Duration::from_secs(1),
        format!("max rel err {worst:.2e} (tol 1e-6), slowest run {slowest:.2?} (budget 1 s)"),
    );
}

fn criterion_2(r: &mut Report, opts: &AveragingOptions) {
    let ((bound, ave_beta, growth, ave_sigma), d) = timed(|| {
        let sc = scenario_illustration(70.0, 0.25).unwrap();
        let sol = Solver::new(&sc.inputs, opts).unwrap().solve(Method::Averaged).unwrap();
        let beta = beta_of(&sc.inputs).unwrap();
        let cg = cumulative_growth(&beta);
        let path = averages_path(sc.inputs.sigma(), &beta, opts).unwrap();
        let last = path.ave_beta.len() - 1;
        (
            *sol.pi_upper_bound.last().unwrap(),
            path.ave_beta[last],
            cg.growth(70.0, 0.0).unwrap().exp(),
            path.ave_sigma[last],
        )
    });
    let pass = (bound - 0.0556).abs() <= 1e-3
        && rel(ave_beta, 0.025) <= 1e-3
        && rel(growth, 10.0) <= 1e-3
        && rel(ave_sigma, 0.5) <= 1e-3
        && d < Duration::from_secs(1);
    r.line(
        2,
        "illustration bound",
        pass,
        format!(
            "bound(70) = {bound:.6}/yr (target 0.0556 ± 1e-3), <beta> = {ave_beta:.6}, Q/Q0 = {growth:.6}, <sigma> = {ave_sigma:.6}, {d:.2?} (budget 1 s)"
        ),
    );
}

fn max_identity_residual(inputs: &EconomyInputs, refine: usize) -> Result<f64, Error> {
    let beta = beta_of(inputs)?;
    let path = averages_path(inputs.sigma(), &beta, &AveragingOptions::with_refine(refine))?;
    Ok(path.identity_residual.iter().fold(0.0, |m, x| m.max(x.abs())))
}

fn criterion_3(r: &mut Report, nonconvergence: &mut usize) {
    let ((worst, min_ratio), d) = timed(|| {
        let mut worst: f64 = 0.0;
        let mut min_ratio = f64::INFINITY;
        for seed in 0..50 {
            let inputs = identity_economy(seed);
            match (max_identity_residual(&inputs, 8), max_identity_residual(&inputs, 16)) {
                (Ok(a), Ok(b)) => {
                    worst = worst.max(a);
                    min_ratio = min_ratio.min(a / b);
                }
                _ => *nonconvergence += 1,
            }
        }
        (worst, min_ratio)
    });
    r.line(
        3,
        "identity residual and convergence",
        worst <= 1e-8 && min_ratio >= 3.5 && d < Duration::from_secs(10),
        format!("max |residual| {worst:.2e} at refine 8 (tol 1e-8), min shrink on doubling {min_ratio:.1}x (need 3.5x), {d:.2?} (budget 10 s)"),
    );
}

fn criterion_4(r: &mut Report, opts: &AveragingOptions, nonconvergence: &mut usize) {
    let ((constant_err, violations), d) = timed(|| {
        let grid = TimeGrid::uniform(80.0, 0.5).unwrap();
        let mut constant_err: f64 = 0.0;
        for b in [-0.03, 0.0, 0.02, 0.05, 0.1] {
            let beta = Series::constant(grid.clone(), b, SeriesKind::RatePerYear).unwrap();
            let cg = cumulative_growth(&beta);
            for &t in &grid.times()[1..] {
                match self_weighted_beta(&cg, t, opts) {
                    Ok(bar) => constant_err = constant_err.max((bar - b).abs()),
                    Err(_) => *nonconvergence += 1,
                }
            }
        }
        let mut violations = 0;
        for seed in 0..100 {
            let low = beta_of(&random_economy(3000 + seed)).unwrap();
            let bump = random_economy(4000 + seed);
            // Non-negative smooth increment built from a random σ path.
            let high: Vec<f64> = low
                .values()
                .iter()
                .zip(bump.sigma().values())
                .map(|(b, s)| b + 0.05 * s)
                .collect();
            let high = Series::on_grid(low.grid().clone(), high, SeriesKind::RatePerYear, RangePolicy::Strict).unwrap();
            let (a, b) = (
                averages_path(&low, &low, opts),
                averages_path(&high, &high, opts),
            );
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    violations += a.bar_beta.iter().zip(&b.bar_beta).filter(|(x, y)| x > y).count();
                }
                _ => *nonconvergence += 1,
            }
        }
        (constant_err, violations)
    });
    r.line(
        4,
        "self-weighted growth assertions",
        constant_err <= 1e-10 && violations == 0 && *nonconvergence == 0 && d < Duration::from_secs(10),
        format!(
            "constant beta error {constant_err:.1e} (tol 1e-10), ordering violations {violations}/100 pairs, root-finder failures {nonconvergence} in criteria 3-4, {d:.2?} (budget 10 s)"
        ),
    );
}

fn criteria_5_6(r: &mut Report, opts: &AveragingOptions, nonconvergence: &mut usize) {
    let ((worst, violations, finite, failures), d) = timed(|| {
        let seeds: Vec<u64> = (0..200).collect();
        let results = opts.exec.map_slice(&seeds, |&seed| solve_all(&random_economy(seed), opts));
        let (mut worst, mut violations, mut finite, mut failures) = (0.0f64, 0usize, 0usize, 0usize);
        for res in results {
            match res {
                Ok(sols) => {
                    worst = worst.max(sols[0].max_rel_dev(&sols[1]));
                    worst = worst.max(sols[1].max_rel_dev(&sols[2]));
                    worst = worst.max(sols[0].max_rel_dev(&sols[2]));
                    for s in &sols {
                        violations += s
                            .pi
                            .iter()
                            .zip(&s.pi_upper_bound)
                            .filter(|(p, b)| b.is_finite() && p > b)
                            .count();
                        finite += s.pi_upper_bound.iter().filter(|b| b.is_finite()).count();
                    }
                }
                Err(Error::NonConvergence { .. }) => {
                    *nonconvergence += 1;
                    failures += 1;
                }
                Err(_) => failures += 1,
            }
        }
        (worst, violations, finite, failures)
    });
    r.line(
        5,
        "cross-method agreement",
        worst <= 1e-6 && failures == 0 && d < Duration::from_secs(30),
        format!("max rel dev in Z {worst:.2e} over 200 scenarios x 3 routes (tol 1e-6), {failures} failed solves, {d:.2?} (budget 30 s)"),
    );
    r.line(
        6,
        "profit rate below bound",
        violations == 0 && failures == 0,
        format!("{violations} violations among {finite} finite-bound samples (strict comparison)"),
    );
}

fn criterion_7(r: &mut Report, opts: &AveragingOptions) {
    let mut worst: f64 = 0.0;
    let mut min_decay = f64::INFINITY;
    for beta0 in [0.02, 0.05, 0.10] {
        let sigma0 = 0.6;
        let step = 0.5;
        let horizon = ((1000f64.ln() / beta0) / step).ceil() * step + step;
        for z0 in [0.0, 0.5 * sigma0 / beta0, 2.0 * sigma0 / beta0] {
            let inputs = scenario_constant(beta0, sigma0, z0, horizon, step).unwrap();
            let sol = Solver::new(&inputs, opts).unwrap().solve(Method::Averaged).unwrap();
            let q = (-beta0 * horizon).exp();
            min_decay = min_decay.min(1.0 / q);
            worst = worst.max(rel(*sol.pi.last().unwrap(), beta0));
        }
    }
    r.line(
        7,
        "mature-economy limit",
        worst < 3e-3,
        format!("max |pi - beta0|/beta0 {worst:.2e} at Q/Q0 >= {min_decay:.0} (tol 3e-3)"),
    );
}

fn criterion_8(r: &mut Report, opts: &AveragingOptions) {
    let ((worst, invalid), d) = timed(|| {
        let seeds: Vec<u64> = (0..50).collect();
        let errs = opts.exec.map_slice(&seeds, |&seed| {
            let inputs = roundtrip_economy(seed);
            let sol = Solver::new(&inputs, opts).unwrap().solve(Method::Averaged).unwrap();
            let grid = sol.grid.clone();
            let pi = Series::on_grid(grid.clone(), sol.pi.clone(), SeriesKind::RatePerYear, RangePolicy::Strict).unwrap();
            let beta = Series::on_grid(grid, sol.beta.clone(), SeriesKind::RatePerYear, RangePolicy::Strict).unwrap();
            let sigma = inputs.sigma().values();
            let inferred = infer_sigma(&pi, &beta, sigma[0]).unwrap();
            let worst = inferred
                .sigma
                .values()
                .iter()
                .zip(sigma)
                .map(|(a, b)| rel(*a, *b))
                .fold(0.0, f64::max);
            (worst, !inferred.all_valid())
        });
        let worst = errs.iter().map(|e| e.0).fold(0.0, f64::max);
        (worst, errs.iter().filter(|e| e.1).count())
    });
    r.line(
        8,
        "inverse roundtrip",
        worst <= 1e-6 && d < Duration::from_secs(10),
        format!("max rel err in sigma {worst:.2e} over 50 scenarios (tol 1e-6), {invalid} flagged invalid, {d:.2?} (budget 10 s)"),
    );
}

fn criterion_9(r: &mut Report, opts: &AveragingOptions) {
    let mut worst: f64 = 0.0;
    let mut estimates = Vec::new();
    for beta0 in [0.02, 0.05, 0.10] {
        let inputs = scenario_constant(beta0, 0.6, 0.0, 100.0, 0.25).unwrap();
        let sol = Solver::new(&inputs, opts).unwrap().solve(Method::Ode).unwrap();
        let beta = beta_of(&inputs).unwrap();
        for eps in [0.02, 0.05, 0.1] {
            let measured = excess_duration(&sol, &beta, eps).unwrap();
            let exact = ((beta0 + eps) / eps).ln() / beta0;
            worst = worst.max((measured - exact).abs());
            let estimate = excess_duration_estimate(eps, 0.6, beta0).unwrap();
            estimates.push(format!("{beta0}/{eps}: {measured:.2} vs est {estimate:.1}"));
        }
    }
    r.line(
        9,
        "excess duration",
        worst <= 0.1,
        format!("max |measured - analytic| {worst:.2e} y (tol 0.1 y); beta0/eps durations {}", estimates.join(", ")),
    );
}

/// Every forward table the suite produces, concatenated as CSV.
fn suite_csv(exec: Exec) -> Vec<u8> {
    let opts = AveragingOptions {
        exec,
        ..AveragingOptions::default()
    };
    let mut batch: Vec<EconomyInputs> = Vec::new();
    for beta0 in [0.02, 0.05, 0.10] {
        batch.push(scenario_constant(beta0, 0.6, 0.0, 100.0, 0.25).unwrap());
    }
    batch.push(scenario_illustration(70.0, 0.25).unwrap().inputs);
    batch.extend((0..200).map(random_economy));
    batch.extend((0..50).map(identity_economy));
    batch.extend((0..50).map(roundtrip_economy));
    let tables = exec.map_slice(&batch, |inputs| {
        let mut buf = Vec::new();
        for sol in solve_all(inputs, &opts).unwrap() {
            write_table(&mut buf, &FORWARD_COLUMNS, &forward_rows(&sol)).unwrap();
        }
        buf
    });
    tables.concat()
}

fn criterion_10(r: &mut Report) {
    let (same, d) = timed(|| {
        let run = |threads: usize, exec: Exec| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| suite_csv(exec))
        };
        let one = run(1, Exec::Parallel);
        let four = run(4, Exec::Parallel);
        let sequential = run(1, Exec::Sequential);
        (one == four && one == sequential, one.len())
    });
    r.line(
        10,
        "determinism across thread counts",
        same.0,
        format!("{} CSV bytes identical for 1 and 4 threads and sequential execution: {}, {d:.2?}", same.1, same.0),
    );
}

fn main() {
    let opts = AveragingOptions::default();
    let mut report = Report { failures: 0 };
    let mut nonconvergence = 0;
    criterion_1(&mut report, &opts);
    criterion_2(&mut report, &opts);
    // Root-finder failures are tallied across criteria 3 and 4; criterion 5
    // counts its own as failed solves.
    criterion_3(&mut report, &mut nonconvergence);
    criterion_4(&mut report, &opts, &mut nonconvergence);
    criteria_5_6(&mut report, &opts, &mut nonconvergence);
    criterion_7(&mut report, &opts);
    criterion_8(&mut report, &opts);
    criterion_9(&mut report, &opts);
    criterion_10(&mut report);
    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
