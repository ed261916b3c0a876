//! Sampled functions of time.
//!
//! A [`Series`] is a set of samples on a [`TimeGrid`] read as the
//! piecewise-linear interpolant through them. Every grid starts at t = 0
//! (construction shifts the first sample there), times are in years and
//! nothing is ever extrapolated past the last sample.

pub mod csv;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when a query time sits on the grid boundary but
/// was produced by floating-point arithmetic.
const SPAN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Validates and normalizes `times` so that the first instant is 0.
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Empty);
        }
        if times.len() < 2 {
            return Err(Error::TooShort(times.len()));
        }
        for (index, &value) in times.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        for index in 1..times.len() {
            if times[index] <= times[index - 1] {
                return Err(Error::NonIncreasing {
                    index,
                    value: times[index],
                });
            }
        }
        let origin = times[0];
        let times: Vec<f64> = times.into_iter().map(|t| t - origin).collect();
        // The shift can in principle collapse two nearly equal instants.
        for index in 1..times.len() {
            if times[index] <= times[index - 1] {
                return Err(Error::NonIncreasing {
                    index,
                    value: times[index],
                });
            }
        }
        Ok(Self { times })
    }

    /// `0, step, 2 step, ...` up to `horizon`; the last instant is always
    /// exactly `horizon` (the final interval may be shorter than `step`).
    pub fn uniform(horizon: f64, step: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("step must be positive, got {step}")));
        }
        let n = (horizon / step + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let last = *times.last().unwrap();
        if (horizon - last).abs() <= 1e-9 * horizon {
            *times.last_mut().unwrap() = horizon;
        } else {
            times.push(horizon);
        }
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Last instant (the first one is always 0).
    pub fn span(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Checks that `t` lies in `[0, span]`, snapping values within rounding
    /// distance of either end onto it.
    pub fn check(&self, t: f64) -> Result<f64> {
        let end = self.span();
        let slack = SPAN_SLACK * end.max(1.0);
        if !t.is_finite() || t < -slack || t > end + slack {
            return Err(Error::OutOfSpan { t, end });
        }
        Ok(t.clamp(0.0, end))
    }

    /// Index `i` of the segment `[t_i, t_{i+1}]` containing `t`, and whether
    /// `t` is exactly the node `t_i` (then `i` may be the last index).
    /// `t` must be in span.
    fn locate(&self, t: f64) -> (usize, bool) {
        let i = self.times.partition_point(|&x| x <= t).max(1) - 1;
        (i, self.times[i] == t)
    }

    /// Sorted union of the instants of both grids; instants closer than a
    /// relative 1e-12 of the span are merged. Spans must agree.
    pub fn union(&self, other: &TimeGrid) -> Result<TimeGrid> {
        let (a, b) = (self.span(), other.span());
        if (a - b).abs() > SPAN_SLACK * a.max(b).max(1.0) {
            return Err(Error::SpanMismatch(a, b));
        }
        let tol = 1e-12 * a.max(1.0);
        let mut merged: Vec<f64> = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let next = match (self.times.get(i), other.times.get(j)) {
                (Some(&x), Some(&y)) if x <= y => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            match merged.last() {
                Some(&last) if next - last <= tol => {}
                _ => merged.push(next),
            }
        }
        // Keep the common end instant exactly as the first grid has it.
        *merged.last_mut().unwrap() = a;
        TimeGrid::new(merged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    RatePerYear,
    DimensionlessFraction,
    Count,
    ValueHours,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::RatePerYear => "rate-per-year",
            SeriesKind::DimensionlessFraction => "dimensionless-fraction",
            SeriesKind::Count => "count",
            SeriesKind::ValueHours => "value-hours",
        })
    }
}

/// Whether fractions may leave `[0, 1]`. Positivity of counts and
/// finiteness are enforced regardless.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangePolicy {
    #[default]
    Strict,
    AllowOutOfRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    grid: TimeGrid,
    values: Vec<f64>,
    kind: SeriesKind,
}

/// Builds a validated series; see [`Series::new`].
pub fn make_series(times: &[f64], values: &[f64], kind: SeriesKind) -> Result<Series> {
    Series::new(times, values, kind)
}

impl Series {
    pub fn new(times: &[f64], values: &[f64], kind: SeriesKind) -> Result<Self> {
        Self::with_policy(times, values, kind, RangePolicy::Strict)
    }

    pub fn with_policy(
        times: &[f64],
        values: &[f64],
        kind: SeriesKind,
        policy: RangePolicy,
    ) -> Result<Self> {
        if times.is_empty() || values.is_empty() {
            return Err(Error::Empty);
        }
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                times: times.len(),
                values: values.len(),
            });
        }
        let grid = TimeGrid::new(times.to_vec())?;
        Self::on_grid(grid, values.to_vec(), kind, policy)
    }

    /// Attaches values to an already validated grid.
    pub fn on_grid(
        grid: TimeGrid,
        values: Vec<f64>,
        kind: SeriesKind,
        policy: RangePolicy,
    ) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                times: grid.len(),
                values: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
            match kind {
                SeriesKind::DimensionlessFraction => {
                    if policy == RangePolicy::Strict && !(0.0..=1.0).contains(&value) {
                        return Err(Error::OutOfRange { index, value, kind });
                    }
                }
                SeriesKind::Count | SeriesKind::ValueHours => {
                    if value <= 0.0 {
                        return Err(Error::OutOfRange { index, value, kind });
                    }
                }
                SeriesKind::RatePerYear => {}
            }
        }
        Ok(Self { grid, values, kind })
    }

    pub fn constant(grid: TimeGrid, value: f64, kind: SeriesKind) -> Result<Self> {
        let n = grid.len();
        Self::on_grid(grid, vec![value; n], kind, RangePolicy::Strict)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn span(&self) -> f64 {
        self.grid.span()
    }

    /// Piecewise-linear interpolation; exact at grid points.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = self.grid.check(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let (i, on_node) = self.grid.locate(t);
        if on_node {
            return self.values[i];
        }
        let ts = self.grid.times();
        let frac = (t - ts[i]) / (ts[i + 1] - ts[i]);
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Integral of the interpolant from 0 to `t` (no range check).
    fn antiderivative(&self, t: f64) -> f64 {
        let ts = self.grid.times();
        let (i, on_node) = self.grid.locate(t);
        let mut acc = 0.0;
        for j in 0..i {
            acc += 0.5 * (ts[j + 1] - ts[j]) * (self.values[j] + self.values[j + 1]);
        }
        if !on_node {
            acc += 0.5 * (t - ts[i]) * (self.values[i] + self.eval_unchecked(t));
        }
        acc
    }

    /// Exact integral of the interpolant over `[t1, t2]`; reversing the
    /// bounds flips the sign.
    pub fn integrate(&self, t1: f64, t2: f64) -> Result<f64> {
        let a = self.grid.check(t1)?;
        let b = self.grid.check(t2)?;
        if a == b {
            return Ok(0.0);
        }
        Ok(self.antiderivative(b) - self.antiderivative(a))
    }

    /// `d ln(s) / dt` on the same grid: three-point second-order stencils,
    /// centered in the interior and one-sided at both ends.
    pub fn log_derivative(&self) -> Result<Series> {
        for (index, &value) in self.values.iter().enumerate() {
            if value <= 0.0 {
                return Err(Error::NonPositive { index, value });
            }
        }
        let logs: Vec<f64> = self.values.iter().map(|v| v.ln()).collect();
        let deriv = derivative(self.grid.times(), &logs);
        Series::on_grid(
            self.grid.clone(),
            deriv,
            SeriesKind::RatePerYear,
            RangePolicy::Strict,
        )
    }

    /// Samples this series' interpolant on `grid` (which must lie inside
    /// this series' span).
    pub fn resample(&self, grid: &TimeGrid) -> Result<Series> {
        let values = grid
            .times()
            .iter()
            .map(|&t| self.eval(t))
            .collect::<Result<Vec<_>>>()?;
        // Linear interpolation stays inside the convex hull of the samples,
        // so the kind's range still holds.
        Series::on_grid(grid.clone(), values, self.kind, RangePolicy::AllowOutOfRange)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Second-order first derivative of samples on a possibly non-uniform grid.
pub(crate) fn derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    debug_assert!(n >= 2 && n == values.len());
    if n == 2 {
        let slope = (values[1] - values[0]) / (times[1] - times[0]);
        return vec![slope, slope];
    }
    // Written on differences so that constant data gives exact zeros.
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = times[i] - times[i - 1];
        let h2 = times[i + 1] - times[i];
        out[i] = h1 / (h2 * (h1 + h2)) * (values[i + 1] - values[i])
            - h2 / (h1 * (h1 + h2)) * (values[i - 1] - values[i]);
    }
    let (h1, h2) = (times[1] - times[0], times[2] - times[1]);
    out[0] = (h1 + h2) / (h1 * h2) * (values[1] - values[0])
        - h1 / (h2 * (h1 + h2)) * (values[2] - values[0]);
    let (h1, h2) = (times[n - 2] - times[n - 3], times[n - 1] - times[n - 2]);
    out[n - 1] = h2 / (h1 * (h1 + h2)) * (values[n - 3] - values[n - 1])
        - (h1 + h2) / (h1 * h2) * (values[n - 2] - values[n - 1]);
    out
}
