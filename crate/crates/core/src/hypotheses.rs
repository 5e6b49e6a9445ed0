//! Numerical checks of the standing assumptions behind the sensitivity and
//! stability results: equi-continuity moduli, derivative infima along
//! orbits, uniform second-derivative bounds and total invariance.
//!
//! Suprema and infima over all step indices are exact when the parameters
//! are constant or periodic (one period suffices) and sampled over a fixed
//! number of indices otherwise. Checks whose conclusion rests only on finite
//! samples are reported as [`CheckStatus::Sampled`].

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::lyapunov::ExponentEstimate;
use crate::maps::{Family, MapSequence, Smoothness, StepMap};
use crate::orbit::{iterate_orbit, Orbit};

/// Grid cells across the domain used by default.
pub const DEFAULT_GRID_POINTS: usize = 10_000;
/// Indices sampled for aperiodic parameter sequences.
pub const DEFAULT_INDEX_HORIZON: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusRow {
    pub epsilon: f64,
    pub delta: f64,
}

/// A tabulated modulus of equi-continuity: for each row, every sampled pair
/// with `|x - y| < delta` satisfies `|h_n(x) - h_n(y)| < epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    /// Rows ordered by decreasing epsilon.
    pub table: Vec<ModulusRow>,
    pub grid_spacing: f64,
    pub index_horizon: u64,
    pub exact_for_periodic: bool,
}

impl ModulusEstimate {
    /// Builds a table from explicit rows, e.g. an analytic modulus.
    pub fn from_rows(mut rows: Vec<ModulusRow>, grid_spacing: f64, index_horizon: u64, exact: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(LabError::Config("modulus table must be nonempty".into()));
        }
        if rows.iter().any(|r| !(r.epsilon > 0.0 && r.delta > 0.0)) {
            return Err(LabError::Config("modulus rows must be positive".into()));
        }
        rows.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        Ok(Self {
            table: rows,
            grid_spacing,
            index_horizon,
            exact_for_periodic: exact,
        })
    }

    /// Modulus `delta = epsilon / lipschitz`.
    pub fn lipschitz(lipschitz: f64, epsilons: &[f64]) -> Result<Self> {
        let rows = epsilons
            .iter()
            .map(|&epsilon| ModulusRow {
                epsilon,
                delta: epsilon / lipschitz,
            })
            .collect();
        Self::from_rows(rows, 0.0, 1, true)
    }

    /// `delta` valid for `epsilon`: the row with the largest tabulated
    /// epsilon not exceeding it.
    pub fn delta_at(&self, epsilon: f64) -> Option<f64> {
        self.table.iter().find(|r| r.epsilon <= epsilon).map(|r| r.delta)
    }
}

/// Estimates `delta(epsilon)` for the family `h_n` on a uniform grid of
/// `domain` over indices `0..index_horizon`.
///
/// `delta` is quantized to the grid: with `D` the largest index distance
/// such that every window of `D + 1` consecutive grid values (for every
/// sampled `n`) has range below `epsilon`, `delta = (D + 1/2) * spacing`,
/// so rounding in grid differences cannot admit a pair `D + 1` cells apart.
/// When every window passes, `delta` is the domain width.
pub fn estimate_modulus<F>(
    h: F,
    domain: &Interval,
    epsilons: &[f64],
    grid_spacing: f64,
    index_horizon: u64,
    exact_for_periodic: bool,
) -> Result<ModulusEstimate>
where
    F: Fn(u64, f64) -> f64,
{
    if epsilons.is_empty() {
        return Err(LabError::Config("no epsilons given".into()));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(LabError::Config("epsilons must be positive".into()));
    }
    let cells = domain.cells_for_spacing(grid_spacing)?;
    let spacing = domain.width() / cells as f64;
    let grid = domain.grid(cells);
    let mut eps: Vec<f64> = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));

    // best[j] = largest admissible window distance for eps[j]
    let mut best = vec![cells; eps.len()];
    let mut values = vec![0.0; grid.len()];
    for n in 0..index_horizon.max(1) {
        for (v, x) in values.iter_mut().zip(&grid) {
            *v = h(n, *x);
        }
        let mut cap = cells;
        for (j, e) in eps.iter().enumerate() {
            let current = best[j].min(cap);
            best[j] = if window_range_below(&values, current, *e) {
                current
            } else {
                largest_window(&values, current, *e)
            };
            cap = best[j];
        }
    }
    let table = eps
        .iter()
        .zip(&best)
        .map(|(&epsilon, &d)| ModulusRow {
            epsilon,
            delta: if d >= cells {
                domain.width()
            } else {
                ((d as f64 + 0.5) * spacing).min(domain.width())
            },
        })
        .collect();
    Ok(ModulusEstimate {
        table,
        grid_spacing: spacing,
        index_horizon: index_horizon.max(1),
        exact_for_periodic,
    })
}

/// Every window `values[i..=i + d]` has `max - min < eps`.
fn window_range_below(values: &[f64], d: usize, eps: f64) -> bool {
    if d == 0 {
        return true;
    }
    let width = d + 1;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    for (i, v) in values.iter().enumerate() {
        while maxq.back().is_some_and(|&j| values[j] <= *v) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| values[j] >= *v) {
            minq.pop_back();
        }
        minq.push_back(i);
        if maxq[0] + width <= i {
            maxq.pop_front();
        }
        if minq[0] + width <= i {
            minq.pop_front();
        }
        if !(values[maxq[0]] - values[minq[0]] < eps) {
            return false;
        }
    }
    true
}

/// Largest `d < upper` passing [`window_range_below`]; `d = 0` always passes.
fn largest_window(values: &[f64], upper: usize, eps: f64) -> usize {
    let (mut lo, mut hi) = (0usize, upper);
    // invariant: lo passes, hi fails
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if window_range_below(values, mid, eps) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Modulus of the derivative family `{f_n'}` on the whole domain.
pub fn derivative_modulus(
    seq: &MapSequence,
    epsilons: &[f64],
    grid_spacing: f64,
    index_horizon: u64,
) -> Result<ModulusEstimate> {
    modulus_on(seq, seq.domain(), epsilons, grid_spacing, index_horizon)
}

fn modulus_on(
    seq: &MapSequence,
    on: &Interval,
    epsilons: &[f64],
    grid_spacing: f64,
    index_horizon: u64,
) -> Result<ModulusEstimate> {
    let (indices, exact) = seq.index_horizon(index_horizon);
    estimate_modulus(|n, x| seq.step(n).deriv1(x), on, epsilons, grid_spacing, indices, exact)
}

/// Modulus of `g ∘ f_n` from moduli of `g` (outer) and `{f_n}` (inner). The
/// caller asserts that the images of the inner maps lie in the set on which
/// the outer modulus was taken.
pub fn compose_modulus(
    outer: &ModulusEstimate,
    inner: &ModulusEstimate,
    inner_range_covered: bool,
) -> Result<ModulusEstimate> {
    if !inner_range_covered {
        return Err(LabError::Range(
            "outer modulus domain does not cover the inner maps' range".into(),
        ));
    }
    let rows: Vec<ModulusRow> = outer
        .table
        .iter()
        .filter_map(|row| {
            inner.delta_at(row.delta).map(|delta| ModulusRow {
                epsilon: row.epsilon,
                delta,
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(LabError::Range(
            "inner table has no epsilon below any outer delta".into(),
        ));
    }
    ModulusEstimate::from_rows(
        rows,
        inner.grid_spacing,
        inner.index_horizon,
        inner.exact_for_periodic && outer.exact_for_periodic,
    )
}

/// Modulus of `{ln max(|f_n'|, floor)}`: the exact modulus
/// `floor (e^eps - 1)` of `z -> ln max(|z|, floor)` composed with the grid
/// modulus of `{f_n'}`.
pub fn log_derivative_modulus(
    seq: &MapSequence,
    floor: f64,
    epsilons: &[f64],
    grid_spacing: f64,
    index_horizon: u64,
) -> Result<ModulusEstimate> {
    if !(floor > 0.0) {
        return Err(LabError::Config(format!("log floor must be positive, got {floor}")));
    }
    let rows = epsilons
        .iter()
        .map(|&epsilon| ModulusRow {
            epsilon,
            delta: floor * epsilon.exp_m1(),
        })
        .collect();
    let outer = ModulusEstimate::from_rows(rows, 0.0, 1, true)?;
    let inner_eps: Vec<f64> = outer.table.iter().map(|r| r.delta).collect();
    let inner = derivative_modulus(seq, &inner_eps, grid_spacing, index_horizon)?;
    compose_modulus(&outer, &inner, true)
}

/// `min |f_n'(x_k)|` over sampled indices `n < index_horizon` (one period
/// when the parameters are periodic) and all orbit points.
pub fn derivative_infimum(seq: &MapSequence, orbit: &Orbit, index_horizon: u64) -> f64 {
    let (indices, _) = seq.index_horizon(index_horizon);
    let mut m = f64::INFINITY;
    for n in 0..indices {
        let f = seq.step(n);
        for x in orbit.points() {
            m = m.min(f.deriv1(*x).abs());
        }
    }
    m
}

fn grid_with_critical(f: &StepMap, on: &Interval, cells: usize) -> Vec<f64> {
    let mut xs = on.grid(cells);
    xs.extend(f.critical_points().into_iter().filter(|c| on.contains(*c)));
    xs
}

/// `max |f_n''(x)|` over a grid and sampled indices.
pub fn second_derivative_bound(seq: &MapSequence, grid_spacing: f64, index_horizon: u64) -> Result<f64> {
    seq.require_c2()?;
    let cells = seq.domain().cells_for_spacing(grid_spacing)?;
    let (indices, _) = seq.index_horizon(index_horizon);
    let grid = seq.domain().grid(cells);
    let mut m = 0.0f64;
    for n in 0..indices {
        let f = seq.step(n);
        if let StepMap::Logistic { r } = f {
            // constant in x
            m = m.max((2.0 * r).abs());
            continue;
        }
        for x in &grid {
            m = m.max(f.deriv2(*x).abs());
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Passed on finite samples only.
    Sampled,
}

fn extremes_exact_in_x(seq: &MapSequence) -> bool {
    match seq.family() {
        Family::Logistic(_) | Family::Affine { .. } => true,
        Family::Polynomial(c) => c.len() <= 3,
    }
}

/// Checks `f_n(sub) ⊂ sub` on a grid of `sub` plus critical points.
pub fn check_invariance(
    seq: &MapSequence,
    sub: &Interval,
    grid_spacing: f64,
    index_horizon: u64,
) -> Result<CheckStatus> {
    if !seq.domain().contains_interval(sub) {
        return Err(LabError::Config(format!(
            "subinterval [{}, {}] is not inside the domain",
            sub.lo(),
            sub.hi()
        )));
    }
    let cells = sub.cells_for_spacing(grid_spacing)?;
    let (indices, exact) = seq.index_horizon(index_horizon);
    let slack = 1e-12 * seq.domain().width();
    for n in 0..indices {
        let f = seq.step(n);
        for x in grid_with_critical(&f, sub, cells) {
            let y = f.value(x);
            if !(y >= sub.lo() - slack && y <= sub.hi() + slack) {
                return Ok(CheckStatus::Fail);
            }
        }
    }
    Ok(if exact && extremes_exact_in_x(seq) {
        CheckStatus::Pass
    } else {
        CheckStatus::Sampled
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Positive exponent at a point implies strong sensitivity there.
    PointSensitivity,
    /// Uniformly positive exponents on an invariant interval imply strong
    /// sensitivity on it.
    SetSensitivity,
    /// `2 lambda(x0) < lambda_0(x0)` with `lambda(x0) < 0` implies
    /// exponential asymptotic stability.
    ExponentialStability,
}

#[derive(Debug, Clone)]
pub enum TheoremTarget {
    Point {
        x0: f64,
        exponents: ExponentEstimate,
    },
    Set {
        subinterval: Interval,
        samples: Vec<(f64, ExponentEstimate)>,
    },
}

#[derive(Debug, Clone)]
pub struct HypothesisConfig {
    pub epsilons: Vec<f64>,
    pub grid_points: usize,
    pub index_horizon: u64,
    /// Orbit length for the derivative infimum; defaults to the exponent horizon.
    pub orbit_horizon: Option<usize>,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.5, 0.1, 0.01],
            grid_points: DEFAULT_GRID_POINTS,
            index_horizon: DEFAULT_INDEX_HORIZON,
            orbit_horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub evidence: f64,
}

impl Check {
    fn new(name: &str, status: CheckStatus, evidence: f64) -> Self {
        Self {
            name: name.to_string(),
            status,
            evidence,
        }
    }

    fn gate(name: &str, ok: bool, evidence: f64) -> Self {
        Self::new(name, if ok { CheckStatus::Pass } else { CheckStatus::Fail }, evidence)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub theorem: Theorem,
    pub checks: Vec<Check>,
    pub overall: CheckStatus,
    /// Candidate sensitivity constant for the strong-sensitivity test.
    pub suggested_delta: Option<f64>,
}

fn overall(checks: &[Check]) -> CheckStatus {
    if checks.iter().any(|c| c.status == CheckStatus::Fail) {
        CheckStatus::Fail
    } else if checks.iter().any(|c| c.status == CheckStatus::Sampled) {
        CheckStatus::Sampled
    } else {
        CheckStatus::Pass
    }
}

/// `x` is fixed by every `f_n`, decided from the family's closed form.
fn is_common_fixed_point(seq: &MapSequence, x: f64) -> bool {
    match seq.family() {
        Family::Logistic(_) => x == 0.0,
        Family::Affine { slope, intercept } => match (slope.period(), intercept.period()) {
            (Some(1), Some(1)) => slope.value(0) * x + intercept.value(0) == x,
            _ => false,
        },
        Family::Polynomial(_) => false,
    }
}

fn equicontinuity_check(seq: &MapSequence, on: &Interval, config: &HypothesisConfig) -> Result<Check> {
    let spacing = seq.domain().width() / config.grid_points as f64;
    let modulus = modulus_on(seq, on, &config.epsilons, spacing, config.index_horizon)?;
    let smallest = modulus.table.last().map(|r| r.delta).unwrap_or(0.0);
    // bounded parameters give a uniform bound on |f_n''|, hence equi-Lipschitz f_n'
    let status = if seq.smoothness() == Smoothness::C2 && seq.second_derivative_sup_bound().is_finite() {
        CheckStatus::Pass
    } else {
        CheckStatus::Sampled
    };
    Ok(Check::new("derivative_equicontinuity", status, smallest))
}

pub fn check_theorem(
    seq: &MapSequence,
    theorem: Theorem,
    target: &TheoremTarget,
    config: &HypothesisConfig,
) -> Result<HypothesisReport> {
    if config.grid_points == 0 || config.epsilons.is_empty() {
        return Err(LabError::Config(
            "hypothesis config needs grid points and epsilons".into(),
        ));
    }
    let spacing = seq.domain().width() / config.grid_points as f64;
    let mut checks = Vec::new();
    let mut suggested_delta = None;
    match (theorem, target) {
        (Theorem::PointSensitivity, TheoremTarget::Point { x0, exponents }) => {
            checks.push(Check::gate("c1_maps", true, 1.0));
            checks.push(equicontinuity_check(seq, seq.domain(), config)?);
            let horizon = config.orbit_horizon.unwrap_or(exponents.horizon).max(1);
            let orbit = iterate_orbit(seq, *x0, horizon)?;
            let (_, index_exact) = seq.index_horizon(config.index_horizon);
            let sampled = derivative_infimum(seq, &orbit, config.index_horizon);
            let fixed = is_common_fixed_point(seq, *x0);
            let analytic = if fixed { seq.derivative_abs_infimum(*x0) } else { None };
            let (status, evidence) = if sampled <= 0.0 || analytic.is_some_and(|a| a <= 0.0) {
                (CheckStatus::Fail, analytic.unwrap_or(sampled).min(sampled))
            } else if fixed && index_exact {
                (CheckStatus::Pass, sampled)
            } else if let Some(a) = analytic {
                (CheckStatus::Pass, a)
            } else {
                (CheckStatus::Sampled, sampled)
            };
            checks.push(Check::new("derivative_infimum_on_orbit", status, evidence));
            checks.push(Check::gate(
                "positive_upper_exponent",
                exponents.upper > 0.0,
                exponents.upper,
            ));
            suggested_delta = Some(seq.domain().width() / 20.0);
        }
        (Theorem::SetSensitivity, TheoremTarget::Set { subinterval, samples }) => {
            if samples.is_empty() {
                return Err(LabError::Config(
                    "set sensitivity needs at least one sample point".into(),
                ));
            }
            checks.push(Check::gate("c1_maps", true, 1.0));
            let inv = check_invariance(seq, subinterval, spacing, config.index_horizon)?;
            checks.push(Check::new(
                "total_invariance",
                inv,
                if inv == CheckStatus::Fail { 0.0 } else { 1.0 },
            ));
            checks.push(equicontinuity_check(seq, subinterval, config)?);

            let (indices, index_exact) = seq.index_horizon(config.index_horizon);
            let cells = subinterval.cells_for_spacing(spacing)?;
            let mut sampled = f64::INFINITY;
            for n in 0..indices {
                let f = seq.step(n);
                for x in grid_with_critical(&f, subinterval, cells) {
                    sampled = sampled.min(f.deriv1(x).abs());
                }
            }
            let analytic = match seq.family() {
                Family::Logistic(_) | Family::Affine { .. } => {
                    let half = 0.5;
                    let xs = [subinterval.lo(), subinterval.hi()];
                    let mut a = xs
                        .iter()
                        .filter_map(|x| seq.derivative_abs_infimum(*x))
                        .fold(f64::INFINITY, f64::min);
                    if matches!(seq.family(), Family::Logistic(_)) && subinterval.contains(half) {
                        a = 0.0;
                    }
                    Some(a)
                }
                Family::Polynomial(_) => None,
            };
            let status = if sampled <= 0.0 || analytic.is_some_and(|a| a <= 0.0) {
                CheckStatus::Fail
            } else if analytic.is_some() || (index_exact && extremes_exact_in_x(seq)) {
                CheckStatus::Pass
            } else {
                CheckStatus::Sampled
            };
            checks.push(Check::new(
                "derivative_lower_bound_on_set",
                status,
                analytic.unwrap_or(sampled),
            ));

            let inf = samples.iter().map(|(_, e)| e.upper).fold(f64::INFINITY, f64::min);
            let status = if inf > 0.0 {
                CheckStatus::Sampled
            } else {
                CheckStatus::Fail
            };
            checks.push(Check::new("positive_exponent_infimum", status, inf));
            suggested_delta = Some(subinterval.width() / 20.0);
        }
        (Theorem::ExponentialStability, TheoremTarget::Point { exponents, .. }) => {
            let c2 = seq.smoothness() == Smoothness::C2;
            checks.push(Check::gate("c2_maps", c2, if c2 { 1.0 } else { 0.0 }));
            checks.push(Check::gate("closed_bounded_interval", true, seq.domain().width()));
            if c2 {
                let m = second_derivative_bound(seq, spacing, config.index_horizon)?;
                let analytic = seq.second_derivative_sup_bound();
                let status = if analytic.is_finite() {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Sampled
                };
                checks.push(Check::new("uniform_second_derivative_bound", status, m));
            }
            let (u, l) = (exponents.upper, exponents.lower);
            checks.push(Check::gate(
                "finite_negative_upper_exponent",
                u.is_finite() && u < 0.0,
                u,
            ));
            checks.push(Check::gate("lower_exponent_finite", l.is_finite(), l));
            checks.push(Check::gate("exponent_gap", 2.0 * u < l, l - 2.0 * u));
        }
        (t, _) => {
            return Err(LabError::Config(format!("target does not match theorem {t:?}")));
        }
    }
    Ok(HypothesisReport {
        theorem,
        overall: overall(&checks),
        checks,
        suggested_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::exponents_at;
    use crate::systems::{affine_constant, logistic};
    use crate::ParamSequence;

    fn periodic234() -> MapSequence {
        logistic(ParamSequence::periodic(vec![2.0, 3.0, 4.0]).unwrap()).unwrap()
    }

    #[test]
    fn logistic_modulus_matches_lipschitz() {
        let s = periodic234();
        let m = derivative_modulus(&s, &[0.1], 1e-4, 256).unwrap();
        let d = m.table[0].delta;
        assert!((d - 0.1 / 8.0).abs() <= 0.1 * 0.1 / 8.0, "delta {d}");
        assert!(m.exact_for_periodic);
        assert_eq!(m.index_horizon, 3);
    }

    #[test]
    fn affine_modulus_is_whole_domain() {
        let s = affine_constant(0.5, 0.1).unwrap();
        let m = derivative_modulus(&s, &[0.1, 0.01], 1e-3, 256).unwrap();
        assert!(m.table.iter().all(|r| r.delta == 1.0));
    }

    #[test]
    fn large_epsilon_gives_whole_domain() {
        let s = periodic234();
        let m = derivative_modulus(&s, &[9.0], 1e-3, 256).unwrap();
        assert_eq!(m.table[0].delta, 1.0);
        assert!(derivative_modulus(&s, &[], 1e-3, 256).is_err());
    }

    #[test]
    fn deltas_shrink_with_epsilon() {
        let s = logistic(ParamSequence::seeded_uniform(1.0, 4.0, 3).unwrap()).unwrap();
        let m = derivative_modulus(&s, &[0.01, 1.0, 0.1, 0.5], 1e-3, 64).unwrap();
        assert!(!m.exact_for_periodic);
        for w in m.table.windows(2) {
            assert!(w[0].epsilon > w[1].epsilon);
            assert!(w[0].delta >= w[1].delta);
        }
    }

    #[test]
    fn lipschitz_composition() {
        let outer = ModulusEstimate::lipschitz(2.0, &[0.1, 0.01]).unwrap();
        let inner = ModulusEstimate::lipschitz(3.0, &[0.05, 0.005]).unwrap();
        let c = compose_modulus(&outer, &inner, true).unwrap();
        for row in &c.table {
            assert!((row.delta - row.epsilon / 6.0).abs() < 1e-15);
        }
        let identity = ModulusEstimate::lipschitz(1.0, &[0.05, 0.005]).unwrap();
        assert_eq!(compose_modulus(&identity, &inner, true).unwrap().table, inner.table);
        assert!(matches!(
            compose_modulus(&outer, &inner, false),
            Err(LabError::Range(_))
        ));
    }

    #[test]
    fn derivative_infimum_examples() {
        let s = periodic234();
        let o = iterate_orbit(&s, 0.0, 100).unwrap();
        assert_eq!(derivative_infimum(&s, &o, 256), 2.0);

        let a = affine_constant(0.5, 0.0).unwrap();
        let o = iterate_orbit(&a, 0.7, 50).unwrap();
        assert_eq!(derivative_infimum(&a, &o, 256), 0.5);

        let four = logistic(ParamSequence::constant(4.0).unwrap()).unwrap();
        let o = iterate_orbit(&four, 0.5, 10).unwrap();
        assert_eq!(derivative_infimum(&four, &o, 256), 0.0);
    }

    #[test]
    fn second_derivative_bounds() {
        assert_eq!(second_derivative_bound(&periodic234(), 1e-3, 256).unwrap(), 8.0);
        let s = logistic(ParamSequence::seeded_uniform(0.5, 0.7, 42).unwrap()).unwrap();
        let m = second_derivative_bound(&s, 1e-3, 256).unwrap();
        assert!(m <= 1.4 && m > 1.3);
        assert_eq!(
            second_derivative_bound(&affine_constant(0.5, 0.0).unwrap(), 1e-3, 256).unwrap(),
            0.0
        );
    }

    #[test]
    fn invariance_examples() {
        let four = logistic(ParamSequence::constant(4.0).unwrap()).unwrap();
        assert_eq!(
            check_invariance(&four, &Interval::unit(), 1e-4, 256).unwrap(),
            CheckStatus::Pass
        );
        let sub = Interval::new(0.0, 0.9).unwrap();
        assert_eq!(check_invariance(&four, &sub, 1e-4, 256).unwrap(), CheckStatus::Fail);
        let a = affine_constant(0.5, 0.0).unwrap();
        assert_eq!(
            check_invariance(&a, &Interval::unit(), 1e-4, 256).unwrap(),
            CheckStatus::Pass
        );
    }

    #[test]
    fn point_sensitivity_on_periodic_logistic() {
        let s = periodic234();
        let e = exponents_at(&s, 0.0, 3000, 0.5).unwrap();
        let r = check_theorem(
            &s,
            Theorem::PointSensitivity,
            &TheoremTarget::Point { x0: 0.0, exponents: e },
            &HypothesisConfig::default(),
        )
        .unwrap();
        assert_eq!(r.overall, CheckStatus::Pass, "{r:?}");
        let m = r
            .checks
            .iter()
            .find(|c| c.name == "derivative_infimum_on_orbit")
            .unwrap();
        assert_eq!(m.evidence, 2.0);
    }

    #[test]
    fn exponential_stability_gates() {
        let cfg = HypothesisConfig::default();
        let s = logistic(ParamSequence::seeded_uniform(0.5, 0.7, 1).unwrap()).unwrap();
        let e = exponents_at(&s, 0.0, 1000, 0.5).unwrap();
        let r = check_theorem(
            &s,
            Theorem::ExponentialStability,
            &TheoremTarget::Point { x0: 0.0, exponents: e },
            &cfg,
        )
        .unwrap();
        assert_eq!(r.overall, CheckStatus::Pass, "{r:?}");

        let s = logistic(ParamSequence::constant(2.0).unwrap()).unwrap();
        let e = exponents_at(&s, 0.0, 1000, 0.5).unwrap();
        let r = check_theorem(
            &s,
            Theorem::ExponentialStability,
            &TheoremTarget::Point {
                x0: 0.0,
                exponents: e.clone(),
            },
            &cfg,
        )
        .unwrap();
        assert_eq!(r.overall, CheckStatus::Fail);
        let sign = r
            .checks
            .iter()
            .find(|c| c.name == "finite_negative_upper_exponent")
            .unwrap();
        assert_eq!(sign.status, CheckStatus::Fail);

        let wrong = TheoremTarget::Set {
            subinterval: Interval::unit(),
            samples: vec![(0.0, e)],
        };
        assert!(matches!(
            check_theorem(&s, Theorem::ExponentialStability, &wrong, &cfg),
            Err(LabError::Config(_))
        ));
    }

    #[test]
    fn set_sensitivity_on_full_interval_fails_at_critical_point() {
        let s = logistic(ParamSequence::constant(4.0).unwrap()).unwrap();
        let samples = [0.13, 0.77]
            .iter()
            .map(|&x| (x, exponents_at(&s, x, 2000, 0.5).unwrap()))
            .collect();
        let r = check_theorem(
            &s,
            Theorem::SetSensitivity,
            &TheoremTarget::Set {
                subinterval: Interval::unit(),
                samples,
            },
            &HypothesisConfig::default(),
        )
        .unwrap();
        assert_eq!(r.overall, CheckStatus::Fail);
        let inv = r.checks.iter().find(|c| c.name == "total_invariance").unwrap();
        assert_eq!(inv.status, CheckStatus::Pass);
        let lb = r
            .checks
            .iter()
            .find(|c| c.name == "derivative_lower_bound_on_set")
            .unwrap();
        assert_eq!(lb.status, CheckStatus::Fail);
    }

    #[test]
    fn window_range_matches_brute_force() {
        let values: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.37).sin()).collect();
        for d in [0usize, 1, 3, 10, 50] {
            for eps in [0.05, 0.3, 1.0, 2.5] {
                let brute = (0..values.len()).all(|i| {
                    let w = &values[i..(i + d + 1).min(values.len())];
                    let mx = w.iter().cloned().fold(f64::MIN, f64::max);
                    let mn = w.iter().cloned().fold(f64::MAX, f64::min);
                    mx - mn < eps
                });
                assert_eq!(window_range_below(&values, d, eps), brute, "d={d} eps={eps}");
            }
        }
    }
}
