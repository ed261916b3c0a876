//! Growth-discounted history averages.
//!
//! With `B(t, s) = ∫_s^t β` the cumulative growth between two instants, the
//! retarded average of a history `f` at time `t` weights each past instant
//! by `e^{-B(t,s)}`, i.e. by how much smaller the productive capacity was
//! back then:
//!
//! ```text
//!   <f>(t) = ∫_0^t e^{-B(t,s)} f(s) ds / ∫_0^t e^{-B(t,s)} ds
//! ```
//!
//! The self-weighted growth rate `β̄(t)` is the constant rate whose kernel
//! has the same mass as the actual one, `(1 - e^{-t β̄}) / β̄ = ∫_0^t e^{-B(t,s)} ds`.
//!
//! All kernel integrals use composite Simpson quadrature on a refinement of
//! the working grid: every grid segment is split into `refine` equal
//! subintervals and each subinterval also uses its midpoint. Inputs are
//! piecewise linear on the working grid, so `B` is exact at every node and
//! midpoint.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::roots::{Bisection, Monotone};
use crate::series::{RangePolicy, Series, SeriesKind, TimeGrid};

/// `(1 - e^{-x}) / x`, with the limit 1 at `x = 0`.
///
/// Strictly positive and strictly decreasing; equal to `∫_0^1 e^{-x s} ds`.
pub fn function_f(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `1 - e^{-x}` without cancellation for small `x`.
pub(crate) fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingOptions {
    /// Quadrature subintervals per grid segment.
    pub refine: usize,
    pub root: Bisection,
    pub exec: Exec,
}

impl Default for AveragingOptions {
    fn default() -> Self {
        Self {
            refine: 8,
            root: Bisection::default(),
            exec: Exec::default(),
        }
    }
}

impl AveragingOptions {
    pub fn with_refine(refine: usize) -> Self {
        Self {
            refine,
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.refine == 0 {
            return Err(Error::domain("refinement factor must be at least 1"));
        }
        if !(self.root.tol > 0.0) {
            return Err(Error::domain("root tolerance must be positive"));
        }
        Ok(())
    }
}

/// Integrated growth `cumB(t) = ∫_0^t β` on the grid of `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeGrowth {
    beta: Series,
    cum: Vec<f64>,
}

pub fn cumulative_growth(beta: &Series) -> CumulativeGrowth {
    let ts = beta.times();
    let bs = beta.values();
    let mut cum = Vec::with_capacity(ts.len());
    cum.push(0.0);
    for i in 1..ts.len() {
        cum.push(cum[i - 1] + 0.5 * (ts[i] - ts[i - 1]) * (bs[i - 1] + bs[i]));
    }
    CumulativeGrowth {
        beta: beta.clone(),
        cum,
    }
}

impl CumulativeGrowth {
    pub fn beta(&self) -> &Series {
        &self.beta
    }

    pub fn grid(&self) -> &TimeGrid {
        self.beta.grid()
    }

    /// `cumB` at the grid instants.
    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    /// `cumB(t)` at any instant in span, exact for the interpolated `β`.
    pub fn cum_at(&self, t: f64) -> Result<f64> {
        let t = self.grid().check(t)?;
        let ts = self.beta.times();
        let i = ts.partition_point(|&x| x <= t).max(1) - 1;
        if ts[i] == t {
            return Ok(self.cum[i]);
        }
        let b = self.beta.values();
        let bt = self.beta.eval_unchecked(t);
        Ok(self.cum[i] + 0.5 * (t - ts[i]) * (b[i] + bt))
    }

    /// `B(t2, t1) = cumB(t2) - cumB(t1)`.
    pub fn growth(&self, t2: f64, t1: f64) -> Result<f64> {
        if t2 == t1 {
            self.grid().check(t1)?;
            return Ok(0.0);
        }
        Ok(self.cum_at(t2)? - self.cum_at(t1)?)
    }

    /// Productive capacity ratio `Q(t) / Q(s) = e^{B(t, s)}`.
    pub fn capacity_ratio(&self, t: f64, s: f64) -> Result<f64> {
        Ok(self.growth(t, s)?.exp())
    }

    /// Productive capacity normalized to `Q(0) = 1`.
    pub fn capacity(&self, t: f64) -> Result<f64> {
        Ok(self.cum_at(t)?.exp())
    }

    /// Averaging weight `e^{-B(t, s)}`.
    pub fn kernel(&self, t: f64, s: f64) -> Result<f64> {
        Ok((-self.growth(t, s)?).exp())
    }
}

/// Node and midpoint samples of a piecewise-linear function on a
/// [`RefinedGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub nodes: Vec<f64>,
    pub mids: Vec<f64>,
}

impl Field {
    pub fn product(&self, other: &Field) -> Field {
        Field {
            nodes: self.nodes.iter().zip(&other.nodes).map(|(a, b)| a * b).collect(),
            mids: self.mids.iter().zip(&other.mids).map(|(a, b)| a * b).collect(),
        }
    }
}

/// A working grid split into `refine` subintervals per segment, carrying
/// `β` and its exact running integral at every node and midpoint.
#[derive(Debug, Clone)]
pub struct RefinedGrid {
    refine: usize,
    base: Vec<f64>,
    nodes: Vec<f64>,
    widths: Vec<f64>,
    beta: Field,
    cum_nodes: Vec<f64>,
    cum_mids: Vec<f64>,
}

impl RefinedGrid {
    /// `beta` holds samples on `base`.
    pub fn new(base: &[f64], beta: &[f64], refine: usize) -> Self {
        assert!(refine >= 1 && base.len() >= 2 && base.len() == beta.len());
        let mut nodes = Vec::with_capacity((base.len() - 1) * refine + 1);
        for j in 0..base.len() - 1 {
            let h = base[j + 1] - base[j];
            for q in 0..refine {
                nodes.push(base[j] + h * (q as f64 / refine as f64));
            }
        }
        nodes.push(*base.last().unwrap());
        let widths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let mut grid = Self {
            refine,
            base: base.to_vec(),
            nodes,
            widths,
            beta: Field {
                nodes: vec![],
                mids: vec![],
            },
            cum_nodes: vec![],
            cum_mids: vec![],
        };
        let beta = grid.field(beta);
        let n = grid.widths.len();
        let mut cum_nodes = Vec::with_capacity(n + 1);
        let mut cum_mids = Vec::with_capacity(n);
        cum_nodes.push(0.0);
        for i in 0..n {
            let h = grid.widths[i];
            cum_mids.push(cum_nodes[i] + 0.25 * h * (beta.nodes[i] + beta.mids[i]));
            cum_nodes.push(cum_nodes[i] + 0.5 * h * (beta.nodes[i] + beta.nodes[i + 1]));
        }
        grid.beta = beta;
        grid.cum_nodes = cum_nodes;
        grid.cum_mids = cum_mids;
        grid
    }

    /// Interpolates samples on the base grid onto nodes and midpoints.
    pub fn field(&self, base_values: &[f64]) -> Field {
        assert_eq!(base_values.len(), self.base.len());
        let m = self.refine as f64;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut mids = Vec::with_capacity(self.widths.len());
        for j in 0..self.base.len() - 1 {
            let (a, b) = (base_values[j], base_values[j + 1]);
            for q in 0..self.refine {
                let q = q as f64;
                nodes.push(a + (q / m) * (b - a));
                mids.push(a + ((q + 0.5) / m) * (b - a));
            }
        }
        nodes.push(*base_values.last().unwrap());
        Field { nodes, mids }
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    pub fn base_times(&self) -> &[f64] {
        &self.base
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn beta(&self) -> &Field {
        &self.beta
    }

    pub fn cum_nodes(&self) -> &[f64] {
        &self.cum_nodes
    }

    /// Refined node index of base instant `k`.
    pub fn node_of(&self, k: usize) -> usize {
        k * self.refine
    }

    /// `∫_0^{t_end} e^{-B(t_end, s)} ds` and `∫_0^{t_end} e^{-B(t_end, s)} f(s) ds`
    /// for each field, `t_end` being refined node `end`.
    pub fn kernel_sums(&self, end: usize, fields: &[&Field]) -> (f64, Vec<f64>) {
        let c_end = self.cum_nodes[end];
        let mut mass = 0.0;
        let mut nums = vec![0.0; fields.len()];
        let mut e0 = (self.cum_nodes[0] - c_end).exp();
        for i in 0..end {
            let em = (self.cum_mids[i] - c_end).exp();
            let e1 = (self.cum_nodes[i + 1] - c_end).exp();
            let w = self.widths[i] / 6.0;
            mass += w * (e0 + 4.0 * em + e1);
            for (acc, f) in nums.iter_mut().zip(fields) {
                *acc += w * (e0 * f.nodes[i] + 4.0 * em * f.mids[i] + e1 * f.nodes[i + 1]);
            }
            e0 = e1;
        }
        (mass, nums)
    }

    /// Same sums with the weights written as capacity ratios `Q(s) / Q(t)`.
    pub fn capacity_sums(&self, end: usize, fields: &[&Field]) -> (f64, Vec<f64>) {
        let q_end = self.cum_nodes[end].exp();
        let mut mass = 0.0;
        let mut nums = vec![0.0; fields.len()];
        for i in 0..end {
            let q0 = self.cum_nodes[i].exp() / q_end;
            let qm = self.cum_mids[i].exp() / q_end;
            let q1 = self.cum_nodes[i + 1].exp() / q_end;
            let w = self.widths[i] / 6.0;
            mass += w * (q0 + 4.0 * qm + q1);
            for (acc, f) in nums.iter_mut().zip(fields) {
                *acc += w * (q0 * f.nodes[i] + 4.0 * qm * f.mids[i] + q1 * f.nodes[i + 1]);
            }
        }
        (mass, nums)
    }

    /// Weights `e^{-B(t_end, s)}` at nodes `0..=end`.
    pub fn kernel_weights(&self, end: usize) -> Vec<f64> {
        let c_end = self.cum_nodes[end];
        self.cum_nodes[..=end].iter().map(|c| (c - c_end).exp()).collect()
    }

    /// Weights `Q(s) / Q(t_end)` at nodes `0..=end`.
    pub fn capacity_weights(&self, end: usize) -> Vec<f64> {
        let q_end = self.cum_nodes[end].exp();
        self.cum_nodes[..=end].iter().map(|c| c.exp() / q_end).collect()
    }
}

/// Sorted instants of both grids strictly before `t`, followed by `t`.
fn nodes_until(a: &TimeGrid, b: &TimeGrid, t: f64) -> Vec<f64> {
    let tol = 1e-12 * t.max(1.0);
    let mut all: Vec<f64> = a
        .times()
        .iter()
        .chain(b.times())
        .copied()
        .filter(|&x| x < t - tol)
        .collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    all.dedup_by(|x, y| (*x - *y).abs() <= tol);
    all.push(t);
    all
}

/// Builds the quadrature grid on `[0, t]` for a single-instant query.
fn local_grid(f: &Series, cg: &CumulativeGrowth, t: f64, opts: &AveragingOptions) -> Result<(RefinedGrid, Field)> {
    opts.validate()?;
    let t = cg.grid().check(t)?;
    let t = f.grid().check(t)?;
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    let nodes = nodes_until(cg.grid(), f.grid(), t);
    let beta: Vec<f64> = nodes.iter().map(|&s| cg.beta.eval_unchecked(s)).collect();
    let values: Vec<f64> = nodes.iter().map(|&s| f.eval_unchecked(s)).collect();
    let grid = RefinedGrid::new(&nodes, &beta, opts.refine);
    let field = grid.field(&values);
    Ok((grid, field))
}

/// Retarded average `<f>(t)` for `0 < t <= span`.
pub fn retarded_average(f: &Series, cg: &CumulativeGrowth, t: f64, opts: &AveragingOptions) -> Result<f64> {
    let (grid, field) = local_grid(f, cg, t, opts)?;
    let end = grid.nodes().len() - 1;
    let (mass, nums) = grid.kernel_sums(end, &[&field]);
    Ok(nums[0] / mass)
}

/// The same average written with capacity weights `Q(s)` instead of
/// `e^{-B(t, s)}`; agrees with [`retarded_average`] to rounding.
pub fn retarded_average_by_capacity(
    f: &Series,
    cg: &CumulativeGrowth,
    t: f64,
    opts: &AveragingOptions,
) -> Result<f64> {
    let (grid, field) = local_grid(f, cg, t, opts)?;
    let end = grid.nodes().len() - 1;
    let (mass, nums) = grid.capacity_sums(end, &[&field]);
    Ok(nums[0] / mass)
}

/// Kernel mass `∫_0^t e^{-B(t,s)} ds`.
pub fn kernel_mass(cg: &CumulativeGrowth, t: f64, opts: &AveragingOptions) -> Result<f64> {
    if cg.grid().check(t)? == 0.0 {
        return Ok(0.0);
    }
    let (grid, _) = local_grid(&cg.beta, cg, t, opts)?;
    let end = grid.nodes().len() - 1;
    Ok(grid.kernel_sums(end, &[]).0)
}

/// Solves `t F(t b) = mass` for `b`, bracketing from the history bounds of β.
fn solve_bar_beta(t: f64, mass: f64, beta_min: f64, beta_max: f64, root: &Bisection) -> Result<f64> {
    root.solve(
        |b| t * function_f(t * b) - mass,
        Monotone::Decreasing,
        beta_min - 1.0,
        beta_max + 1.0,
    )
}

fn history_bounds(cg: &CumulativeGrowth, t: f64) -> (f64, f64) {
    let ts = cg.beta.times();
    let bs = cg.beta.values();
    let mut lo = cg.beta.eval_unchecked(t);
    let mut hi = lo;
    for (&s, &b) in ts.iter().zip(bs) {
        if s > t {
            break;
        }
        lo = lo.min(b);
        hi = hi.max(b);
    }
    (lo, hi)
}

/// Self-weighted moving average `β̄(t)` for `0 < t <= span`.
pub fn self_weighted_beta(cg: &CumulativeGrowth, t: f64, opts: &AveragingOptions) -> Result<f64> {
    let t = cg.grid().check(t)?;
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    let mass = kernel_mass(cg, t, opts)?;
    let (lo, hi) = history_bounds(cg, t);
    solve_bar_beta(t, mass, lo, hi, &opts.root)
}

/// `β̄/(1 - e^{-t β̄}) - <β>/(1 - e^{-B(t,0)})`, which vanishes identically;
/// the size of the computed value measures quadrature error.
pub fn identity_13_residual(beta: &Series, cg: &CumulativeGrowth, t: f64, opts: &AveragingOptions) -> Result<f64> {
    let t = cg.grid().check(t)?;
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    let (grid, field) = local_grid(beta, cg, t, opts)?;
    let end = grid.nodes().len() - 1;
    let (mass, nums) = grid.kernel_sums(end, &[&field]);
    let (lo, hi) = history_bounds(cg, t);
    let bar = solve_bar_beta(t, mass, lo, hi, &opts.root)?;
    Ok(residual_terms(t, bar, nums[0] / mass, mass, cg.cum_at(t)?))
}

fn residual_terms(t: f64, bar_beta: f64, ave_beta: f64, mass: f64, growth: f64) -> f64 {
    let left = 1.0 / (t * function_f(t * bar_beta));
    let right = if growth == 0.0 {
        1.0 / mass
    } else {
        ave_beta / one_minus_exp_neg(growth)
    };
    left - right
}

/// Retarded averages sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragesPath {
    pub grid: TimeGrid,
    pub ave_sigma: Vec<f64>,
    pub ave_beta: Vec<f64>,
    pub bar_beta: Vec<f64>,
    /// Kernel mass `∫_0^t e^{-B(t,s)} ds`; zero at `t = 0`.
    pub denom: Vec<f64>,
    pub identity_residual: Vec<f64>,
}

/// Per-instant kernel integrals computed once and shared by the averages
/// and the forward solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct KernelSample {
    pub mass: f64,
    pub sigma: f64,
    pub beta: f64,
    pub source: f64,
}

impl AveragesPath {
    /// `t = 0` takes the analytic limits `<f>(0) = f(0)`, `β̄(0) = β(0)`.
    pub(crate) fn from_kernel(
        grid: &TimeGrid,
        refined: &RefinedGrid,
        sigma: &[f64],
        beta: &[f64],
        samples: &[KernelSample],
        opts: &AveragingOptions,
    ) -> Result<Self> {
        let times = grid.times();
        let mut running = Vec::with_capacity(beta.len());
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &b in beta {
            lo = lo.min(b);
            hi = hi.max(b);
            running.push((lo, hi));
        }
        let solved: Vec<Result<(f64, f64)>> = opts.exec.map_indexed(times.len(), |k| {
            if k == 0 {
                return Ok((beta[0], 0.0));
            }
            let t = times[k];
            let s = &samples[k];
            let (lo, hi) = running[k];
            let bar = solve_bar_beta(t, s.mass, lo, hi, &opts.root)?;
            let growth = refined.cum_nodes()[refined.node_of(k)];
            Ok((bar, residual_terms(t, bar, s.beta / s.mass, s.mass, growth)))
        });
        let mut bar_beta = Vec::with_capacity(times.len());
        let mut identity_residual = Vec::with_capacity(times.len());
        for r in solved {
            let (b, res) = r?;
            bar_beta.push(b);
            identity_residual.push(res);
        }
        let ave = |k: usize, num: f64, at_zero: f64| {
            if k == 0 {
                at_zero
            } else {
                num / samples[k].mass
            }
        };
        Ok(Self {
            grid: grid.clone(),
            ave_sigma: (0..times.len()).map(|k| ave(k, samples[k].sigma, sigma[0])).collect(),
            ave_beta: (0..times.len()).map(|k| ave(k, samples[k].beta, beta[0])).collect(),
            bar_beta,
            denom: samples.iter().map(|s| s.mass).collect(),
            identity_residual,
        })
    }
}

/// Kernel integrals at every base instant.
pub(crate) fn kernel_samples(refined: &RefinedGrid, sigma: &Field, source: &Field, exec: Exec) -> Vec<KernelSample> {
    let n = refined.base_times().len();
    exec.map_indexed(n, |k| {
        let end = refined.node_of(k);
        let (mass, nums) = refined.kernel_sums(end, &[sigma, refined.beta(), source]);
        KernelSample {
            mass,
            sigma: nums[0],
            beta: nums[1],
            source: nums[2],
        }
    })
}

/// Averages of `sigma` and `beta` over their union grid.
pub fn averages_path(sigma: &Series, beta: &Series, opts: &AveragingOptions) -> Result<AveragesPath> {
    opts.validate()?;
    let grid = sigma.grid().union(beta.grid())?;
    let sigma = sigma.resample(&grid)?;
    let beta = beta.resample(&grid)?;
    let refined = RefinedGrid::new(grid.times(), beta.values(), opts.refine);
    let sigma_field = refined.field(sigma.values());
    let samples = kernel_samples(&refined, &sigma_field, &sigma_field, opts.exec);
    AveragesPath::from_kernel(&grid, &refined, sigma.values(), beta.values(), &samples, opts)
}

/// Convenience: a constant rate series on `grid`.
pub fn constant_rate(grid: &TimeGrid, value: f64) -> Series {
    Series::on_grid(grid.clone(), vec![value; grid.len()], SeriesKind::RatePerYear, RangePolicy::Strict)
        .expect("finite constant")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(times: &[f64], values: &[f64]) -> Series {
        Series::new(times, values, SeriesKind::RatePerYear).unwrap()
    }

    /// Independent oracle: midpoint rule on a very fine uniform partition,
    /// with `B` accumulated by the same midpoint rule.
    fn brute_force(f: impl Fn(f64) -> f64, beta: impl Fn(f64) -> f64, t: f64, n: usize) -> (f64, f64) {
        let h = t / n as f64;
        // cumulative growth from each midpoint to t, accumulated backward
        let mut mass = 0.0;
        let mut num = 0.0;
        let mut b_from_end = 0.0;
        for i in (0..n).rev() {
            let right = (i + 1) as f64 * h;
            let mid = (i as f64 + 0.5) * h;
            // B(t, mid) = B(t, right) + ∫_mid^right β
            let b_mid = b_from_end + 0.5 * h * beta(0.5 * (mid + right));
            let w = (-b_mid).exp();
            mass += w * h;
            num += w * f(mid) * h;
            b_from_end += h * beta(mid);
        }
        (mass, num)
    }

    #[test]
    fn function_f_examples() {
        assert_eq!(function_f(0.0), 1.0);
        assert!((function_f(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-16);
        assert!((function_f(1.0) - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((function_f(-1.0) - 1.718_281_828_459_045).abs() < 1e-15);
    }

    #[test]
    fn function_f_is_continuous_across_taylor_switch() {
        for &x in &[1e-8f64, -1e-8, 1.0001e-8, 1e-5, -1e-5] {
            let direct = -(-x).exp_m1() / x;
            assert!((function_f(x) - direct).abs() < 1e-15, "{x}");
        }
        assert!(function_f(9.9e-9) > function_f(1.01e-8));
    }

    #[test]
    fn cumulative_growth_examples() {
        let grid = TimeGrid::uniform(10.0, 1.0).unwrap();
        let cg = cumulative_growth(&constant_rate(&grid, 0.02));
        assert!((cg.growth(10.0, 0.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((cg.capacity_ratio(10.0, 0.0).unwrap() - 1.221_402_758_160_17).abs() < 1e-14);
        assert_eq!(cg.growth(3.7, 3.7).unwrap(), 0.0);
        assert!(cg.growth(11.0, 0.0).is_err());
    }

    #[test]
    fn cum_at_is_exact_between_nodes() {
        let beta = rate(&[0.0, 2.0, 5.0], &[0.01, 0.05, -0.02]);
        let cg = cumulative_growth(&beta);
        // ∫_0^1 (0.01 + 0.02 s) ds = 0.02; ∫_0^3.5 = 0.06 + ∫_2^3.5 (0.05 - 0.07/3 (s-2)) ds
        assert!((cg.cum_at(1.0).unwrap() - 0.02).abs() < 1e-15);
        let expect = 0.06 + 0.05 * 1.5 - 0.07 / 3.0 * 1.5 * 1.5 / 2.0;
        assert!((cg.cum_at(3.5).unwrap() - expect).abs() < 1e-15);
        let (a, b, c) = (0.3, 2.7, 4.9);
        let lhs = cg.growth(c, a).unwrap();
        let rhs = cg.growth(c, b).unwrap() + cg.growth(b, a).unwrap();
        assert!((lhs - rhs).abs() < 1e-16);
    }

    #[test]
    fn average_of_constant_is_constant() {
        let beta = rate(&[0.0, 3.0, 7.0, 10.0], &[0.03, -0.01, 0.08, 0.02]);
        let cg = cumulative_growth(&beta);
        let f = rate(&[0.0, 10.0], &[0.5, 0.5]);
        for &t in &[0.1, 2.5, 7.0, 10.0] {
            let a = retarded_average(&f, &cg, t, &AveragingOptions::default()).unwrap();
            assert!((a - 0.5).abs() < 1e-15, "{a}");
        }
    }

    #[test]
    fn zero_growth_gives_plain_time_average() {
        let grid = TimeGrid::uniform(1.0, 0.5).unwrap();
        let cg = cumulative_growth(&constant_rate(&grid, 0.0));
        let f = rate(&[0.0, 1.0], &[0.0, 1.0]);
        let a = retarded_average(&f, &cg, 1.0, &AveragingOptions::default()).unwrap();
        let (mass, num) = brute_force(|s| s, |_| 0.0, 1.0, 1_000_000);
        assert!((a - num / mass).abs() < 1e-10);
        assert!((a - 0.5).abs() < 1e-15);
    }

    #[test]
    fn average_matches_brute_force_with_growth() {
        let beta = rate(&[0.0, 4.0, 10.0], &[0.06, 0.0, 0.03]);
        let sigma = rate(&[0.0, 5.0, 10.0], &[0.3, 0.9, 0.6]);
        let cg = cumulative_growth(&beta);
        let t = 10.0;
        let (mass, num) = brute_force(|s| sigma.eval(s).unwrap(), |s| beta.eval(s).unwrap(), t, 1_000_000);
        // Segments here are 4-6 years long, so the default refinement is
        // coarse; a finer one must close the gap at fourth order.
        let a = retarded_average(&sigma, &cg, t, &AveragingOptions::default()).unwrap();
        assert!((a - num / mass).abs() < 1e-7, "{a} vs {}", num / mass);
        let fine = AveragingOptions::with_refine(64);
        let a = retarded_average(&sigma, &cg, t, &fine).unwrap();
        assert!((a - num / mass).abs() < 1e-10, "{a} vs {}", num / mass);
        let m = kernel_mass(&cg, t, &fine).unwrap();
        assert!((m - mass).abs() < 1e-9);
    }

    #[test]
    fn averages_at_zero_are_errors() {
        let grid = TimeGrid::uniform(5.0, 1.0).unwrap();
        let cg = cumulative_growth(&constant_rate(&grid, 0.02));
        let f = constant_rate(&grid, 0.5);
        let opts = AveragingOptions::default();
        assert_eq!(retarded_average(&f, &cg, 0.0, &opts), Err(Error::ZeroTime));
        assert_eq!(self_weighted_beta(&cg, 0.0, &opts), Err(Error::ZeroTime));
        assert!(matches!(retarded_average(&f, &cg, 6.0, &opts), Err(Error::OutOfSpan { .. })));
    }

    #[test]
    fn capacity_form_agrees() {
        let beta = rate(&[0.0, 4.0, 10.0], &[0.06, -0.01, 0.03]);
        let sigma = rate(&[0.0, 5.0, 10.0], &[0.3, 0.9, 0.6]);
        let cg = cumulative_growth(&beta);
        let opts = AveragingOptions::default();
        for &t in &[1.0, 5.5, 10.0] {
            let a = retarded_average(&sigma, &cg, t, &opts).unwrap();
            let b = retarded_average_by_capacity(&sigma, &cg, t, &opts).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn self_weighted_beta_of_constant() {
        let grid = TimeGrid::uniform(50.0, 1.0).unwrap();
        let cg = cumulative_growth(&constant_rate(&grid, 0.03));
        for &t in &[0.5, 1.0, 17.3, 50.0] {
            let b = self_weighted_beta(&cg, t, &AveragingOptions::default()).unwrap();
            assert!((b - 0.03).abs() < 1e-10, "{t}: {b}");
        }
    }

    #[test]
    fn self_weighted_beta_piecewise_step() {
        // 0.05 on [0, 10], 0.01 after; the step is carried by a 1e-6 ramp.
        let beta = rate(&[0.0, 10.0, 10.0 + 1e-6, 20.0], &[0.05, 0.05, 0.01, 0.01]);
        let cg = cumulative_growth(&beta);
        let b = self_weighted_beta(&cg, 20.0, &AveragingOptions::default()).unwrap();
        // Oracle: closed-form kernel mass of the exact step, inverted by
        // plain bisection to machine precision.
        let mass = (1.0 - (-0.1f64).exp()) / 0.01 + (-0.1f64).exp() * (1.0 - (-0.5f64).exp()) / 0.05;
        let (mut lo, mut hi) = (0.0f64, 0.1f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let g = (1.0 - (-20.0 * mid).exp()) / mid - mass;
            if g > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(b > 0.01 && b < 0.05);
        assert!((b - oracle).abs() < 1e-7, "{b} vs {oracle}");
    }

    #[test]
    fn identity_residual_examples() {
        let opts = AveragingOptions::default();
        let grid = TimeGrid::uniform(20.0, 1.0).unwrap();
        let beta = constant_rate(&grid, 0.03);
        let cg = cumulative_growth(&beta);
        assert!(identity_13_residual(&beta, &cg, 10.0, &opts).unwrap().abs() < 1e-12);
        let zero = constant_rate(&grid, 0.0);
        let cg0 = cumulative_growth(&zero);
        assert!(identity_13_residual(&zero, &cg0, 5.0, &opts).unwrap().abs() < 1e-15);
    }

    #[test]
    fn path_matches_single_queries() {
        let beta = rate(&[0.0, 4.0, 10.0], &[0.06, -0.01, 0.03]);
        let sigma = rate(&[0.0, 5.0, 10.0], &[0.3, 0.9, 0.6]);
        let opts = AveragingOptions::default();
        let path = averages_path(&sigma, &beta, &opts).unwrap();
        let cg = cumulative_growth(&beta.resample(&path.grid).unwrap());
        assert_eq!(path.grid.times(), &[0.0, 4.0, 5.0, 10.0]);
        assert_eq!(path.ave_sigma[0], 0.3);
        assert_eq!(path.bar_beta[0], 0.06);
        assert_eq!(path.denom[0], 0.0);
        for (k, &t) in path.grid.times().iter().enumerate().skip(1) {
            let a = retarded_average(&sigma, &cg, t, &opts).unwrap();
            assert!((a - path.ave_sigma[k]).abs() < 1e-13);
            let b = self_weighted_beta(&cg, t, &opts).unwrap();
            assert!((b - path.bar_beta[k]).abs() < 1e-12);
            assert!(path.denom[k] > 0.0);
        }
    }

    #[test]
    fn refined_weights_two_forms() {
        let base = [0.0, 1.0, 3.0, 6.0];
        let grid = RefinedGrid::new(&base, &[0.1, -0.05, 0.2, 0.04], 8);
        let end = grid.node_of(3);
        let a = grid.kernel_weights(end);
        let b = grid.capacity_weights(end);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14 * x.max(*y));
        }
    }
}
