//! Bracketing bisection for strictly monotone scalar maps.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    /// Stop once the bracket is at most this wide.
    pub tol: f64,
    /// Cap on expansion plus halving steps.
    pub max_iter: usize,
}

impl Default for Bisection {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
}

impl Bisection {
    /// Finds the zero of a strictly monotone `f`, starting from `[lo, hi]`
    /// and widening the bracket geometrically until it straddles the root.
    ///
    /// The returned point is the secant zero inside the final bracket, which
    /// for smooth `f` is far more accurate than the bracket width.
    pub fn solve<F>(&self, f: F, direction: Monotone, mut lo: f64, mut hi: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        if !(lo < hi) {
            return Err(Error::domain(format!("empty bracket [{lo}, {hi}]")));
        }
        // Orient so that g(lo) <= 0 <= g(hi) with g increasing.
        let g = |x: f64| match direction {
            Monotone::Increasing => f(x),
            Monotone::Decreasing => -f(x),
        };
        let mut iterations = 0;
        let mut glo = g(lo);
        let mut ghi = g(hi);
        let mut width = hi - lo;
        while glo > 0.0 || ghi < 0.0 {
            if iterations >= self.max_iter {
                return Err(Error::NonConvergence {
                    iterations,
                    width: hi - lo,
                });
            }
            iterations += 1;
            width *= 2.0;
            if glo > 0.0 {
                hi = lo;
                ghi = glo;
                lo -= width;
                glo = g(lo);
            } else {
                lo = hi;
                glo = ghi;
                hi += width;
                ghi = g(hi);
            }
            if glo.is_nan() || ghi.is_nan() {
                return Err(Error::Numerical("NaN while expanding bracket".into()));
            }
        }
        while hi - lo > self.tol {
            if iterations >= self.max_iter {
                return Err(Error::NonConvergence {
                    iterations,
                    width: hi - lo,
                });
            }
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if gm.is_nan() {
                return Err(Error::Numerical(format!("NaN at {mid}")));
            }
            if gm == 0.0 {
                return Ok(mid);
            }
            if gm < 0.0 {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        if glo == 0.0 {
            return Ok(lo);
        }
        if ghi == 0.0 {
            return Ok(hi);
        }
        if glo.is_finite() && ghi.is_finite() && ghi > glo {
            let x = lo - glo * (hi - lo) / (ghi - glo);
            return Ok(x.clamp(lo, hi));
        }
        Ok(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let x = Bisection::default()
            .solve(|x| x * x - 2.0, Monotone::Increasing, 0.0, 2.0)
            .unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn expands_bracket_both_ways() {
        let b = Bisection::default();
        let x = b.solve(|x| 50.0 - x, Monotone::Decreasing, 0.0, 1.0).unwrap();
        assert!((x - 50.0).abs() < 1e-12);
        let x = b.solve(|x| x + 75.0, Monotone::Increasing, 0.0, 1.0).unwrap();
        assert!((x + 75.0).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let b = Bisection {
            tol: 1e-12,
            max_iter: 5,
        };
        assert!(matches!(
            b.solve(|x| x - 0.123, Monotone::Increasing, -1.0, 1.0),
            Err(Error::NonConvergence { .. })
        ));
    }
}
