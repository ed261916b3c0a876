//! Named generators of economy inputs: constant coefficients, the
//! seventy-year post-war illustration, and seeded random smooth histories.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::averages::{cumulative_growth, retarded_average, AveragingOptions};
use crate::dynamics::{EconomyInputs, Initial, Labour};
use crate::error::{Error, Result};
use crate::roots::{Bisection, Monotone};
use crate::series::{RangePolicy, Series, SeriesKind, TimeGrid};

/// A generated economy plus human-readable notes on the choices made.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub inputs: EconomyInputs,
    pub notes: Vec<String>,
}

/// Request for a named scenario. Missing horizon/step take the scenario's
/// defaults; unknown parameter names are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

pub const SCENARIO_NAMES: [&str; 3] = ["constant", "illustration", "random"];

impl ScenarioSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            parameters: BTreeMap::new(),
            horizon: None,
            step: None,
            seed: 0,
        }
    }

    pub fn build(&self) -> Result<Scenario> {
        let (keys, horizon, step): (&[&str], f64, f64) = match self.name.as_str() {
            "constant" => (&["beta0", "sigma0", "z0"], 100.0, 0.25),
            "illustration" => (&[], 70.0, 0.25),
            "random" => (&["beta_min", "beta_max", "sigma_min", "sigma_max"], 60.0, 0.5),
            other => return Err(Error::UnknownScenario(other.to_string())),
        };
        if let Some(k) = self.parameters.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Error::domain(format!(
                "scenario `{}` has no parameter `{k}` (expected one of: {})",
                self.name,
                keys.join(", ")
            )));
        }
        let horizon = self.horizon.unwrap_or(horizon);
        let step = self.step.unwrap_or(step);
        let p = |k: &str, default: f64| self.parameters.get(k).copied().unwrap_or(default);
        let inputs = match self.name.as_str() {
            "constant" => scenario_constant(p("beta0", 0.05), p("sigma0", 0.6), p("z0", 0.0), horizon, step)?,
            "illustration" => return scenario_illustration(horizon, step),
            _ => scenario_random(
                self.seed,
                horizon,
                step,
                (p("beta_min", -0.02), p("beta_max", 0.10)),
                (p("sigma_min", 0.2), p("sigma_max", 1.0)),
            )?,
        };
        Ok(Scenario {
            name: self.name.clone(),
            inputs,
            notes: Vec::new(),
        })
    }
}

fn check_horizon(horizon: f64, step: f64) -> Result<TimeGrid> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be > 0, got {horizon}")));
    }
    if !(step > 0.0 && step <= horizon / 2.0) {
        return Err(Error::domain(format!("step must lie in (0, horizon/2], got {step}")));
    }
    TimeGrid::uniform(horizon, step)
}

fn sampled(grid: &TimeGrid, f: impl Fn(f64) -> f64, kind: SeriesKind) -> Result<Series> {
    let values = grid.times().iter().map(|&t| f(t)).collect();
    Series::on_grid(grid.clone(), values, kind, RangePolicy::Strict)
}

/// Productivity growth that makes `β` come out exactly as `beta` given the
/// labour history: `r = β - L̇/L`, with `L̇/L` computed the same way the
/// solver computes it.
fn residual_productivity(beta: &Series, labour: &Series) -> Result<Series> {
    let growth = labour.log_derivative()?;
    let r = beta.values().iter().zip(growth.values()).map(|(b, g)| b - g).collect();
    Series::on_grid(beta.grid().clone(), r, SeriesKind::RatePerYear, RangePolicy::Strict)
}

/// Constant `β0` and `σ0` with unit labour (so `r = β0`). `z0 = 0` is a
/// new economy; `z0 = σ0/β0` is the steady state.
pub fn scenario_constant(beta0: f64, sigma0: f64, z0: f64, horizon: f64, step: f64) -> Result<EconomyInputs> {
    let grid = check_horizon(horizon, step)?;
    if !beta0.is_finite() {
        return Err(Error::domain(format!("beta0 must be finite, got {beta0}")));
    }
    let initial = if z0 == 0.0 {
        Initial::NewEconomy
    } else {
        Initial::Capital(z0)
    };
    EconomyInputs::new(
        Series::constant(grid.clone(), beta0, SeriesKind::RatePerYear)?,
        Labour::Total(Series::constant(grid.clone(), 1.0, SeriesKind::ValueHours)?),
        Series::constant(grid, sigma0, SeriesKind::DimensionlessFraction)?,
        None,
        initial,
        RangePolicy::Strict,
    )
}

/// Calibration of the illustration.
const GROWTH_FACTOR: f64 = 10.0;
const AVE_BETA: f64 = 0.025;
const RECENT_BETA: f64 = 0.02;
const AVE_SIGMA: f64 = 0.5;
const SIGMA_PEAK: f64 = 1.0;
const PEAK_YEARS: f64 = 2.0;

/// A post-war economy observed at `t = horizon`: capacity grew tenfold,
/// recent growth is 2%/yr with `<β> = 0.025/yr`, `<σ> = 0.50`, and `σ`
/// was pushed to 1 over the last two years.
///
/// `β` falls linearly from an early level `b_e` to 2%/yr at `T` and stays
/// there; `T` follows from the tenfold growth, and `b_e` is found by
/// bisection on `<β>`. `σ` is flat at `s_e` until two years before the end
/// and then ramps linearly to 1; `s_e` follows from `<σ>` (which is affine
/// in it). Labour grows 1%/yr and the economy starts at its steady state.
pub fn scenario_illustration(horizon: f64, step: f64) -> Result<Scenario> {
    let base = check_horizon(horizon, step)?;
    let ln_growth = GROWTH_FACTOR.ln();
    let excess = ln_growth - RECENT_BETA * horizon;
    if !(excess > 0.0) || !(horizon > PEAK_YEARS) {
        return Err(Error::Infeasible(format!(
            "a {GROWTH_FACTOR}-fold expansion at {RECENT_BETA}/yr recent growth needs a horizon in ({PEAK_YEARS}, {}) years",
            ln_growth / RECENT_BETA
        )));
    }
    let opts = AveragingOptions::default();
    // Early level b_e and kink time T with ∫β = ln 10: (b_e - RECENT_BETA) T / 2 = excess.
    let kink = |b_e: f64| 2.0 * excess / (b_e - RECENT_BETA);
    let profile = |b_e: f64| -> Result<Series> {
        let t_kink = kink(b_e);
        let grid = with_nodes(&base, &[t_kink, horizon - PEAK_YEARS])?;
        sampled(
            &grid,
            |t| {
                if t < t_kink {
                    b_e + (RECENT_BETA - b_e) * t / t_kink
                } else {
                    RECENT_BETA
                }
            },
            SeriesKind::RatePerYear,
        )
    };
    let ave_beta = |b_e: f64| -> f64 {
        profile(b_e)
            .and_then(|beta| retarded_average(&beta, &cumulative_growth(&beta), horizon, &opts))
            .unwrap_or(f64::NAN)
    };
    // The kink must fall inside the horizon: b_e >= RECENT_BETA + 2 excess / horizon.
    let lo = RECENT_BETA + 2.0 * excess / horizon;
    let hi = RECENT_BETA + 2.0 * excess / step.min(1.0);
    let (f_lo, f_hi) = (ave_beta(lo) - AVE_BETA, ave_beta(hi) - AVE_BETA);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Infeasible(format!(
            "<beta> = {AVE_BETA}/yr is out of reach: the profile family spans [{}, {}] at t = {horizon}",
            f_hi + AVE_BETA,
            f_lo + AVE_BETA
        )));
    }
    let b_e = Bisection { tol: 1e-13, max_iter: 200 }.solve(|b| ave_beta(b) - AVE_BETA, Monotone::Decreasing, lo, hi)?;
    let beta = profile(b_e)?;
    let grid = beta.grid().clone();
    let cg = cumulative_growth(&beta);

    let ramp_start = horizon - PEAK_YEARS;
    let ramp = sampled(
        &grid,
        |t| ((t - ramp_start) / PEAK_YEARS).clamp(0.0, 1.0),
        SeriesKind::DimensionlessFraction,
    )?;
    let ave_ramp = retarded_average(&ramp, &cg, horizon, &opts)?;
    // σ = s_e (1 - ρ) + SIGMA_PEAK ρ, so <σ> = s_e (1 - <ρ>) + SIGMA_PEAK <ρ>.
    let s_e = (AVE_SIGMA - SIGMA_PEAK * ave_ramp) / (1.0 - ave_ramp);
    if !(s_e > 0.0 && s_e <= 1.0) {
        return Err(Error::Infeasible(format!("early sigma would be {s_e}")));
    }
    let sigma = sampled(
        &grid,
        |t| {
            let rho = ((t - ramp_start) / PEAK_YEARS).clamp(0.0, 1.0);
            s_e * (1.0 - rho) + SIGMA_PEAK * rho
        },
        SeriesKind::DimensionlessFraction,
    )?;
    let labour = sampled(&grid, |t| 100.0 * (0.01 * t).exp(), SeriesKind::ValueHours)?;
    let r = residual_productivity(&beta, &labour)?;
    let initial = Initial::Capital(s_e / b_e);
    let inputs = EconomyInputs::new(r, Labour::Total(labour), sigma, None, initial, RangePolicy::Strict)?;
    let notes = vec![
        format!("beta falls linearly from {b_e:.6}/yr at t = 0 to {RECENT_BETA}/yr at t = {:.4} yr", kink(b_e)),
        format!("sigma = {s_e:.6} until t = {ramp_start} yr, then rises linearly to {SIGMA_PEAK}"),
        "the early sigma path is one admissible choice; only its average is calibrated".into(),
        format!("labour grows 1%/yr; Z0 = sigma(0)/beta(0) = {:.6} yr", s_e / b_e),
    ];
    Ok(Scenario {
        name: "illustration".into(),
        inputs,
        notes,
    })
}

/// `base` plus the given instants, unless one already lies within rounding
/// of a node.
fn with_nodes(base: &TimeGrid, extra: &[f64]) -> Result<TimeGrid> {
    let mut grid = base.clone();
    for &t in extra {
        let near = base.times().iter().any(|&s| (s - t).abs() <= 1e-9 * base.span().max(1.0));
        if !near && t > 0.0 && t < base.span() {
            grid = grid.union(&TimeGrid::new(vec![0.0, t, base.span()])?)?;
        }
    }
    Ok(grid)
}

/// Seeded smooth random economy: `β` and `σ` are each a mean plus three
/// sinusoids with periods of 10-60 years, with amplitudes summing to 95% of
/// the half-range, clipped to the range for safety. Labour grows
/// exponentially at a random rate in [-0.5, 1.5]%/yr from a random level,
/// `φ ≡ 1`, and `Z0` is drawn from [1, 30] years.
pub fn scenario_random(
    seed: u64,
    horizon: f64,
    step: f64,
    beta_range: (f64, f64),
    sigma_range: (f64, f64),
) -> Result<EconomyInputs> {
    let grid = check_horizon(horizon, step)?;
    let (b_lo, b_hi) = beta_range;
    let (s_lo, s_hi) = sigma_range;
    if !(b_lo.is_finite() && b_hi.is_finite() && b_lo <= b_hi) {
        return Err(Error::domain(format!("bad beta range [{b_lo}, {b_hi}]")));
    }
    if !(s_lo > 0.0 && s_lo <= s_hi && s_hi <= 1.0) {
        return Err(Error::domain(format!("sigma range [{s_lo}, {s_hi}] must lie in (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = smooth(&mut rng, &grid, b_lo, b_hi, SeriesKind::RatePerYear)?;
    let sigma = smooth(&mut rng, &grid, s_lo, s_hi, SeriesKind::DimensionlessFraction)?;
    let growth = rng.random_range(-0.005..=0.015);
    let l0 = rng.random_range(50.0..=150.0);
    let z0 = rng.random_range(1.0..=30.0);
    let labour = sampled(&grid, |t| l0 * (growth * t).exp(), SeriesKind::ValueHours)?;
    let r = residual_productivity(&beta, &labour)?;
    EconomyInputs::new(r, Labour::Total(labour), sigma, None, Initial::Capital(z0), RangePolicy::Strict)
}

fn smooth(rng: &mut ChaCha8Rng, grid: &TimeGrid, lo: f64, hi: f64, kind: SeriesKind) -> Result<Series> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut waves = [(0.0, 0.0, 0.0); 3];
    let mut total = 0.0;
    for w in &mut waves {
        let weight: f64 = rng.random_range(0.2..=1.0);
        let period: f64 = rng.random_range(10.0..=60.0);
        let phase: f64 = rng.random_range(0.0..TAU);
        *w = (weight, TAU / period, phase);
        total += weight;
    }
    let scale = 0.95 * half / total;
    sampled(
        grid,
        |t| {
            let v: f64 = waves.iter().map(|&(a, k, p)| scale * a * (k * t + p).sin()).sum();
            (mid + v).clamp(lo, hi)
        },
        kind,
    )
}
