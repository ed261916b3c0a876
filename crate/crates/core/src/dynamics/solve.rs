use serde::{Deserialize, Serialize};

use super::{beta_of, EconomyInputs};
use crate::averages::{kernel_samples, one_minus_exp_neg, AveragesPath, AveragingOptions, Field, KernelSample, RefinedGrid};
use crate::error::{Error, Result};
use crate::series::{Series, TimeGrid};

/// Below this `|1 - Q0/Q|` the averaged route takes the quadrature value:
/// both `<β>` and `1 - Q0/Q` vanish there and their ratio is ill-conditioned.
const AVERAGED_FALLBACK: f64 = 1e-6;

/// Relative slack when checking `π <= bound`. A new economy (`Z0 = 0`)
/// attains the bound exactly, so the two sides differ only by rounding.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Fourth-order Runge-Kutta on `Ż = φσ - βZ`.
    Ode,
    /// `Z(t) = Z0 e^{-B(t,0)} + ∫_0^t e^{-B(t,s)} φσ ds`.
    Quadrature,
    /// `Z = <φσ>/<β> + (Q0/Q)(Z0 - <φσ>/<β>)`.
    Averaged,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ode, Method::Quadrature, Method::Averaged];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ode => "ode",
            Method::Quadrature => "quadrature",
            Method::Averaged => "averaged",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown method `{s}` (ode, quadrature, averaged)")))
    }
}

/// A forward solution sampled on the input grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub method: Method,
    pub grid: TimeGrid,
    /// Capital per worker-hour, years.
    pub z: Vec<f64>,
    /// Profit rate per year; `+inf` where `Z = 0` and `σ > 0`.
    pub pi: Vec<f64>,
    /// Capital stock, value-hours.
    pub k: Vec<f64>,
    pub averages: AveragesPath,
    /// Mature approximation `<β> σ / <φσ>`.
    pub pi_mature: Vec<f64>,
    /// Upper bound `σ <β> / (<φσ> (1 - Q0/Q))`; `+inf` while the economy
    /// has not grown.
    pub pi_upper_bound: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Set when the invested share `φ` is not identically 1, so the
    /// averaged form uses `<φσ>` in place of `<σ>`.
    pub extension: bool,
    /// Samples where the averaged route fell back to quadrature.
    pub fallbacks: usize,
}

impl SolutionPath {
    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    /// Largest `|a - b| / max(|a|, |b|)` over the `Z` paths.
    pub fn max_rel_dev(&self, other: &SolutionPath) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .map(|(&a, &b)| {
                let scale = a.abs().max(b.abs());
                if scale == 0.0 {
                    0.0
                } else {
                    (a - b).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    /// Samples where `π` exceeds a finite bound by more than [`BOUND_SLACK`].
    pub fn bound_violations(&self) -> usize {
        self.pi
            .iter()
            .zip(&self.pi_upper_bound)
            .filter(|(&p, &b)| b.is_finite() && p > b * (1.0 + BOUND_SLACK))
            .count()
    }
}

/// Shared state of the three forward routes: the refined grid, the input
/// fields on it and the kernel integrals at every grid instant.
#[derive(Debug, Clone)]
pub struct Solver {
    inputs: EconomyInputs,
    opts: AveragingOptions,
    beta: Series,
    refined: RefinedGrid,
    source: Field,
    samples: Vec<KernelSample>,
    averages: AveragesPath,
}

impl Solver {
    pub fn new(inputs: &EconomyInputs, opts: &AveragingOptions) -> Result<Self> {
        opts.validate()?;
        let beta = beta_of(inputs)?;
        let grid = inputs.grid();
        let refined = RefinedGrid::new(grid.times(), beta.values(), opts.refine);
        let sigma = refined.field(inputs.sigma().values());
        let source = refined.field(inputs.phi().values()).product(&sigma);
        let samples = kernel_samples(&refined, &sigma, &source, opts.exec);
        let averages = AveragesPath::from_kernel(
            grid,
            &refined,
            inputs.sigma().values(),
            beta.values(),
            &samples,
            opts,
        )?;
        Ok(Self {
            inputs: inputs.clone(),
            opts: *opts,
            beta,
            refined,
            source,
            samples,
            averages,
        })
    }

    pub fn inputs(&self) -> &EconomyInputs {
        &self.inputs
    }

    pub fn options(&self) -> &AveragingOptions {
        &self.opts
    }

    pub fn beta(&self) -> &Series {
        &self.beta
    }

    pub fn averages(&self) -> &AveragesPath {
        &self.averages
    }

    /// `e^{-B(t_k, 0)}` at base instant `k`.
    fn decay(&self, k: usize) -> f64 {
        (-self.refined.cum_nodes()[self.refined.node_of(k)]).exp()
    }

    /// `<φσ>` at base instant `k`, with the `t = 0` limit.
    fn ave_source(&self, k: usize) -> f64 {
        if k == 0 {
            self.source.nodes[0]
        } else {
            self.samples[k].source / self.samples[k].mass
        }
    }

    fn z_quadrature(&self) -> Vec<f64> {
        let z0 = self.inputs.z0();
        (0..self.samples.len())
            .map(|k| if k == 0 { z0 } else { z0 * self.decay(k) + self.samples[k].source })
            .collect()
    }

    fn z_ode(&self) -> Vec<f64> {
        let beta = self.refined.beta();
        let src = &self.source;
        let widths = self.refined.widths();
        let mut z = self.inputs.z0();
        let mut out = Vec::with_capacity(self.samples.len());
        out.push(z);
        for (i, &h) in widths.iter().enumerate() {
            let f = |b: f64, s: f64, z: f64| s - b * z;
            let k1 = f(beta.nodes[i], src.nodes[i], z);
            let k2 = f(beta.mids[i], src.mids[i], z + 0.5 * h * k1);
            let k3 = f(beta.mids[i], src.mids[i], z + 0.5 * h * k2);
            let k4 = f(beta.nodes[i + 1], src.nodes[i + 1], z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (i + 1) % self.refined.refine() == 0 {
                out.push(z);
            }
        }
        out
    }

    /// Returns the `Z` path and the number of quadrature fallbacks.
    fn z_averaged(&self) -> (Vec<f64>, usize) {
        let z0 = self.inputs.z0();
        let mut fallbacks = 0;
        let z = (0..self.samples.len())
            .map(|k| {
                if k == 0 {
                    return z0;
                }
                let q = self.decay(k);
                let grown = one_minus_exp_neg(self.refined.cum_nodes()[self.refined.node_of(k)]);
                if grown.abs() < AVERAGED_FALLBACK {
                    fallbacks += 1;
                    return z0 * q + self.samples[k].source;
                }
                let fixed = self.ave_source(k) / self.averages.ave_beta[k];
                fixed + q * (z0 - fixed)
            })
            .collect();
        (z, fallbacks)
    }

    /// `σ / A` with `A = <φσ>(1 - Q0/Q)/<β>` the part of `Z` built up since
    /// `t = 0`. Since `Z = A + (Q0/Q) Z0` and `Z0 >= 0`, `π <= σ/A`.
    fn upper_bound(&self, k: usize) -> f64 {
        let sigma = self.inputs.sigma().values()[k];
        if sigma == 0.0 {
            return 0.0;
        }
        if k == 0 {
            return f64::INFINITY;
        }
        let grown = one_minus_exp_neg(self.refined.cum_nodes()[self.refined.node_of(k)]);
        let ave_beta = self.averages.ave_beta[k];
        let ave_source = self.ave_source(k);
        if !(grown > 0.0 && ave_beta > 0.0 && ave_source > 0.0) {
            return f64::INFINITY;
        }
        sigma * ave_beta / (ave_source * grown)
    }

    fn mature(&self, k: usize) -> f64 {
        let sigma = self.inputs.sigma().values()[k];
        let ave_source = self.ave_source(k);
        if sigma == 0.0 {
            0.0
        } else if ave_source > 0.0 {
            self.averages.ave_beta[k] * sigma / ave_source
        } else {
            f64::INFINITY
        }
    }

    pub fn solve(&self, method: Method) -> Result<SolutionPath> {
        let (z, fallbacks) = match method {
            Method::Ode => (self.z_ode(), 0),
            Method::Quadrature => (self.z_quadrature(), 0),
            Method::Averaged => self.z_averaged(),
        };
        let sigma = self.inputs.sigma().values();
        let labour = self.inputs.labour_total().values();
        let mut pi = Vec::with_capacity(z.len());
        for (k, (&z, &s)) in z.iter().zip(sigma).enumerate() {
            if !(z >= 0.0) || !z.is_finite() {
                return Err(Error::Numerical(format!(
                    "Z = {z} at t = {} ({} route)",
                    self.inputs.grid().times()[k],
                    method.name()
                )));
            }
            pi.push(if z > 0.0 {
                s / z
            } else if s > 0.0 {
                f64::INFINITY
            } else {
                0.0
            });
        }
        let n = z.len();
        Ok(SolutionPath {
            method,
            grid: self.inputs.grid().clone(),
            k: z.iter().zip(labour).map(|(z, l)| z * l).collect(),
            z,
            pi,
            averages: self.averages.clone(),
            pi_mature: (0..n).map(|k| self.mature(k)).collect(),
            pi_upper_bound: (0..n).map(|k| self.upper_bound(k)).collect(),
            beta: self.beta.values().to_vec(),
            sigma: sigma.to_vec(),
            extension: !self.inputs.phi_is_unity(),
            fallbacks,
        })
    }
}

pub fn solve_ode(inputs: &EconomyInputs, opts: &AveragingOptions) -> Result<SolutionPath> {
    Solver::new(inputs, opts)?.solve(Method::Ode)
}

pub fn solve_quadrature(inputs: &EconomyInputs, opts: &AveragingOptions) -> Result<SolutionPath> {
    Solver::new(inputs, opts)?.solve(Method::Quadrature)
}

pub fn solve_averaged(inputs: &EconomyInputs, opts: &AveragingOptions) -> Result<SolutionPath> {
    Solver::new(inputs, opts)?.solve(Method::Averaged)
}

/// Solves independent economies concurrently; results keep input order.
pub fn solve_batch(batch: &[EconomyInputs], method: Method, opts: &AveragingOptions) -> Vec<Result<SolutionPath>> {
    opts.exec
        .map_slice(batch, |inputs| Solver::new(inputs, opts)?.solve(method))
}
