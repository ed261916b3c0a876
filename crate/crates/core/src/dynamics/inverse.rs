use crate::error::{Error, Result};
use crate::series::{RangePolicy, Series, SeriesKind, TimeGrid};

/// Rate of surplus value recovered from observed profit and growth rates.
#[derive(Debug, Clone, PartialEq)]
pub struct InferredSigma {
    /// May leave `[0, 1]`; see `valid`.
    pub sigma: Series,
    /// Whether each sample lies in `(0, 1]`.
    pub valid: Vec<bool>,
}

impl InferredSigma {
    pub fn grid(&self) -> &TimeGrid {
        self.sigma.grid()
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }
}

/// Substeps per grid segment in [`infer_sigma`], matching the default
/// forward refinement.
pub const INVERSE_REFINE: usize = 8;

/// Recovers `σ` from `σ̇/σ = π̇/π - β + π` and `σ(0) = sigma0`.
///
/// In terms of `Z = σ/π` the relation reads `Ż = σ - βZ`. Like every input
/// history, `σ` is taken to be linear between samples, so on each segment
/// `Z` at the far end is affine in the unknown next sample of `σ`, and
/// matching it to `σ/π` there is a scalar linear equation. `Z` is advanced
/// by fourth-order Runge-Kutta on [`INVERSE_REFINE`] substeps, so applied to
/// a forward solution this reproduces its `σ` to solver accuracy.
pub fn infer_sigma(pi: &Series, beta: &Series, sigma0: f64) -> Result<InferredSigma> {
    infer_sigma_with(pi, beta, sigma0, INVERSE_REFINE)
}

pub fn infer_sigma_with(pi: &Series, beta: &Series, sigma0: f64, refine: usize) -> Result<InferredSigma> {
    if !(sigma0 > 0.0 && sigma0 <= 1.0) {
        return Err(Error::domain(format!("sigma0 must lie in (0, 1], got {sigma0}")));
    }
    if refine == 0 {
        return Err(Error::domain("refinement factor must be at least 1"));
    }
    let grid = pi.grid().union(beta.grid())?;
    let pi = pi.resample(&grid)?;
    let beta = beta.resample(&grid)?;
    if let Some(index) = pi.values().iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::NonPositive {
            index,
            value: pi.values()[index],
        });
    }
    let t = grid.times();
    let p = pi.values();
    let b = beta.values();
    let mut out = Vec::with_capacity(t.len());
    out.push(sigma0);
    let mut z = sigma0 / p[0];
    for k in 0..t.len() - 1 {
        let (a, slope) = segment(t[k + 1] - t[k], b[k], b[k + 1], out[k], z, refine);
        // Z(t_{k+1}) = a + slope σ_{k+1} must equal σ_{k+1} / π_{k+1}.
        let denom = 1.0 / p[k + 1] - slope;
        if !(denom > 0.0) {
            return Err(Error::Numerical(format!(
                "profit rate {} at t = {} is too high to be reached within one step",
                p[k + 1],
                t[k + 1]
            )));
        }
        let next = a / denom;
        out.push(next);
        z = next / p[k + 1];
    }
    let valid = out.iter().map(|&s| s > 0.0 && s <= 1.0 + 1e-12).collect();
    let sigma = Series::on_grid(grid, out, SeriesKind::DimensionlessFraction, RangePolicy::AllowOutOfRange)?;
    Ok(InferredSigma { sigma, valid })
}

/// Integrates `Ż = σ - βZ` across one segment of width `h` with `β` and `σ`
/// linear. Returns `(a, slope)` with `Z(h) = a + slope σ(h)`: `a` carries
/// `z0` and the start value `s0`, `slope` the unit response to the end value.
fn segment(h: f64, b0: f64, b1: f64, s0: f64, z0: f64, refine: usize) -> (f64, f64) {
    let dt = h / refine as f64;
    let beta = |w: f64| b0 + (b1 - b0) * w;
    // State: (part from z0 and s0, response to the end value of σ).
    let f = |w: f64, y: (f64, f64)| {
        let bw = beta(w);
        (s0 * (1.0 - w) - bw * y.0, w - bw * y.1)
    };
    let mut y = (z0, 0.0);
    for i in 0..refine {
        let w0 = i as f64 / refine as f64;
        let wm = (i as f64 + 0.5) / refine as f64;
        let w1 = (i + 1) as f64 / refine as f64;
        let k1 = f(w0, y);
        let k2 = f(wm, (y.0 + 0.5 * dt * k1.0, y.1 + 0.5 * dt * k1.1));
        let k3 = f(wm, (y.0 + 0.5 * dt * k2.0, y.1 + 0.5 * dt * k2.1));
        let k4 = f(w1, (y.0 + dt * k3.0, y.1 + dt * k3.1));
        y.0 += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y.1 += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    y
}
