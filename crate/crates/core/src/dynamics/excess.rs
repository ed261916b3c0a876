use super::SolutionPath;
use crate::error::{Error, Result};
use crate::series::Series;

/// Total time during which `π - β > eps`, with crossings located by linear
/// interpolation between samples. A segment starting at an infinite profit
/// rate counts in full when it ends above the threshold and for half its
/// length otherwise.
pub fn excess_duration(sol: &SolutionPath, beta: &Series, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be > 0, got {eps}")));
    }
    let times = sol.times();
    let gap: Vec<f64> = times
        .iter()
        .zip(&sol.pi)
        .map(|(&t, &p)| Ok(p - beta.eval(t)? - eps))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for k in 0..times.len() - 1 {
        let h = times[k + 1] - times[k];
        let (a, b) = (gap[k], gap[k + 1]);
        total += match (a > 0.0, b > 0.0) {
            (true, true) => h,
            (false, false) => 0.0,
            _ if a.is_infinite() || b.is_infinite() => 0.5 * h,
            (true, false) => h * a / (a - b),
            (false, true) => h * b / (b - a),
        };
    }
    Ok(total)
}

/// Order-of-magnitude duration of an excess `eps` of `π` over `β`:
/// `(1/eps) [ln(1/σ) + ln(1/(β' + eps))]`. A heuristic, not a bound.
pub fn excess_duration_estimate(eps: f64, sigma_end: f64, beta_end: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be > 0, got {eps}")));
    }
    if !(sigma_end > 0.0 && sigma_end <= 1.0) {
        return Err(Error::domain(format!("sigma must lie in (0, 1], got {sigma_end}")));
    }
    if !(beta_end + eps > 0.0) {
        return Err(Error::domain(format!("beta + eps must be > 0, got {}", beta_end + eps)));
    }
    Ok(((1.0 / sigma_end).ln() + (1.0 / (beta_end + eps)).ln()) / eps)
}
