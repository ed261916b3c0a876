//! Profit-rate dynamics.
//!
//! Capital grows by reinvested profit and is cheapened by productivity
//! growth `r`. With labour flow `L = λ P`, rate of surplus value
//! `σ = 1 - w` and `β = L̇/L + r`, the profit rate `π = σ L / K` obeys
//!
//! ```text
//!   π̇/π = σ̇/σ + β - π
//! ```
//!
//! which becomes linear in capital per worker-hour `Z = σ/π = K/L`:
//! `Ż + β Z = φ σ` (φ is the invested share of profit, normally 1).

mod excess;
mod inverse;
mod solve;

pub use excess::{excess_duration, excess_duration_estimate};
pub use inverse::{infer_sigma, infer_sigma_with, InferredSigma, INVERSE_REFINE};
pub use solve::{
    solve_averaged, solve_batch, solve_ode, solve_quadrature, Method, SolutionPath, Solver, BOUND_SLACK,
};

use crate::averages::function_f;
use crate::error::{Error, Result};
use crate::series::{RangePolicy, Series, SeriesKind, TimeGrid};

/// Labour input: either the aggregate flow `L` or its two factors.
#[derive(Debug, Clone, PartialEq)]
pub enum Labour {
    Total(Series),
    Split { lambda: Series, workforce: Series },
}

/// Initial condition of the forward problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    /// Capital per worker-hour `Z0 >= 0`, in years.
    Capital(f64),
    /// Initial profit rate `π0 > 0`, per year; converted via `Z0 = σ(0)/π0`.
    ProfitRate(f64),
    /// Labour but no capital: `Z0 = 0`, so `π` starts infinite.
    NewEconomy,
}

/// Validated input histories on one common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyInputs {
    grid: TimeGrid,
    r: Series,
    labour: Labour,
    labour_total: Series,
    sigma: Series,
    phi: Series,
    phi_is_unity: bool,
    initial: Initial,
    z0: f64,
}

impl EconomyInputs {
    /// Resamples every history onto the union of their grids (spans must
    /// agree) and checks ranges: `σ, φ ∈ [0, 1]`, `λ ∈ (0, 1]`, `P, L > 0`.
    /// `AllowOutOfRange` lifts the upper/lower fraction limits but keeps
    /// `λ > 0` and the positivity of counts.
    pub fn new(
        r: Series,
        labour: Labour,
        sigma: Series,
        phi: Option<Series>,
        initial: Initial,
        policy: RangePolicy,
    ) -> Result<Self> {
        let mut grid = r.grid().union(sigma.grid())?;
        match &labour {
            Labour::Total(l) => grid = grid.union(l.grid())?,
            Labour::Split { lambda, workforce } => {
                grid = grid.union(lambda.grid())?.union(workforce.grid())?;
            }
        }
        if let Some(phi) = &phi {
            grid = grid.union(phi.grid())?;
        }

        let r = r.resample(&grid)?;
        let sigma = sigma.resample(&grid)?;
        check_fraction("sigma", &sigma, policy, false)?;
        let phi_is_unity = phi.as_ref().is_none_or(|p| p.values().iter().all(|&v| v == 1.0));
        let phi = match phi {
            Some(p) => p.resample(&grid)?,
            None => Series::constant(grid.clone(), 1.0, SeriesKind::DimensionlessFraction)?,
        };
        check_fraction("phi", &phi, policy, false)?;
        let (labour, labour_total) = match labour {
            Labour::Total(l) => {
                let l = l.resample(&grid)?;
                check_positive("L", &l)?;
                (Labour::Total(l.clone()), l)
            }
            Labour::Split { lambda, workforce } => {
                let lambda = lambda.resample(&grid)?;
                let workforce = workforce.resample(&grid)?;
                check_fraction("lambda", &lambda, policy, true)?;
                check_positive("P", &workforce)?;
                let total: Vec<f64> = lambda
                    .values()
                    .iter()
                    .zip(workforce.values())
                    .map(|(a, b)| a * b)
                    .collect();
                let l = Series::on_grid(grid.clone(), total, SeriesKind::ValueHours, RangePolicy::Strict)?;
                (Labour::Split { lambda, workforce }, l)
            }
        };
        let z0 = match initial {
            Initial::Capital(z) => {
                if !(z >= 0.0 && z.is_finite()) {
                    return Err(Error::domain(format!("Z0 must be finite and >= 0, got {z}")));
                }
                z
            }
            Initial::ProfitRate(p) => {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::domain(format!("pi0 must be finite and > 0, got {p}")));
                }
                let s0 = sigma.values()[0];
                if s0 <= 0.0 {
                    return Err(Error::domain("pi0 given but sigma(0) = 0 leaves Z0 undefined"));
                }
                s0 / p
            }
            Initial::NewEconomy => 0.0,
        };
        Ok(Self {
            grid,
            r,
            labour,
            labour_total,
            sigma,
            phi,
            phi_is_unity,
            initial,
            z0,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn r(&self) -> &Series {
        &self.r
    }

    pub fn labour(&self) -> &Labour {
        &self.labour
    }

    /// `L = λ P` (or `L` itself).
    pub fn labour_total(&self) -> &Series {
        &self.labour_total
    }

    pub fn sigma(&self) -> &Series {
        &self.sigma
    }

    pub fn phi(&self) -> &Series {
        &self.phi
    }

    pub fn phi_is_unity(&self) -> bool {
        self.phi_is_unity
    }

    pub fn initial(&self) -> Initial {
        self.initial
    }

    /// Initial capital per worker-hour, in years.
    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Initial capital stock `K0 = Z0 L(0)`, in value-hours.
    pub fn k0(&self) -> f64 {
        self.z0 * self.labour_total.values()[0]
    }
}

fn check_fraction(name: &str, s: &Series, policy: RangePolicy, strictly_positive: bool) -> Result<()> {
    for (index, &value) in s.values().iter().enumerate() {
        let ok = match policy {
            RangePolicy::Strict => value <= 1.0 && if strictly_positive { value > 0.0 } else { value >= 0.0 },
            RangePolicy::AllowOutOfRange => !strictly_positive || value > 0.0,
        };
        if !ok {
            return Err(Error::domain(format!("{name} = {value} out of range at sample {index}")));
        }
    }
    Ok(())
}

fn check_positive(name: &str, s: &Series) -> Result<()> {
    match s.values().iter().position(|&v| v <= 0.0) {
        Some(index) => Err(Error::domain(format!(
            "{name} = {} must be > 0 at sample {index}",
            s.values()[index]
        ))),
        None => Ok(()),
    }
}

/// `β = L̇/L + r` on the input grid.
pub fn beta_of(inputs: &EconomyInputs) -> Result<Series> {
    let growth: Vec<f64> = match &inputs.labour {
        Labour::Total(l) => l.log_derivative()?.values().to_vec(),
        Labour::Split { lambda, workforce } => {
            let a = lambda.log_derivative()?;
            let b = workforce.log_derivative()?;
            a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect()
        }
    };
    let beta = growth.iter().zip(inputs.r.values()).map(|(g, r)| g + r).collect();
    Series::on_grid(inputs.grid.clone(), beta, SeriesKind::RatePerYear, RangePolicy::Strict)
}

/// Surplus value per unit time, `s = σ L = (1 - w) λ P`.
pub fn surplus_flow(inputs: &EconomyInputs, t: f64) -> Result<f64> {
    Ok(inputs.sigma.eval(t)? * inputs.labour_total.eval(t)?)
}

/// Conventional rate of exploitation `e = σ / (1 - σ)`.
pub fn exploitation_rate(sigma: f64) -> Result<f64> {
    if sigma == 1.0 {
        return Err(Error::InfiniteExploitation);
    }
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::domain(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    Ok(sigma / (1.0 - sigma))
}

/// Profit rate of a new economy with constant growth `β0`:
/// `β0 / (1 - e^{-β0 t})`, which is `1/t` when `β0 = 0`.
pub fn new_economy_pi(beta0: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be > 0, got {t}")));
    }
    Ok(1.0 / (t * function_f(beta0 * t)))
}
