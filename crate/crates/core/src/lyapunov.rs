//! Finite-horizon estimators for the upper exponent
//! `lambda(x0) = limsup (1/n) sum ln|f_k'(x_k)|` and the lower exponent
//! `lambda_0(x0)` (the corresponding liminf).
//!
//! Neither limit is computable from a finite orbit. The estimators take the
//! max and min of the Cesàro averages `S_n / n` over a tail window
//! `n in [ceil(tail_fraction * N), N]` and flag whether the two agree.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::maps::MapSequence;
use crate::orbit::{iterate_orbit, Orbit};

/// Default fraction of the horizon discarded before the tail window.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// `upper - lower` at or below this (nats/step) counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Shortest horizon accepted by [`estimate_exponents`].
pub const MIN_ESTIMATE_HORIZON: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    /// `S_n / n` for `n = 1..=N`, stored at index `n - 1`.
    #[serde(skip)]
    pub finite_time_series: Vec<f64>,
    /// Tail maximum, the estimate of the upper exponent.
    pub upper: f64,
    /// Tail minimum, the estimate of the lower exponent.
    pub lower: f64,
    pub tail_start: usize,
    pub horizon: usize,
    pub converged: bool,
    pub oscillation_width: f64,
}

impl ExponentEstimate {
    /// `S_n / n` at step `n >= 1`.
    pub fn at(&self, n: usize) -> f64 {
        self.finite_time_series[n - 1]
    }
}

/// `S_n / n` for `n = 1..=N`; entries are `-inf` once a derivative vanished.
///
/// The sums are re-accumulated from the stored log-derivatives in
/// double-double arithmetic, so a constant sequence of log-derivatives yields
/// that constant bitwise and long horizons keep ~1e-16 relative accuracy.
pub fn finite_time_exponents(orbit: &Orbit) -> Vec<f64> {
    let mut acc = DoubleDouble::default();
    orbit
        .log_derivs()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            acc.add(*l);
            acc.div(i as f64 + 1.0)
        })
        .collect()
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Default, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add(&mut self, x: f64) {
        if !x.is_finite() || !self.hi.is_finite() {
            self.hi += x;
            self.lo = 0.0;
            return;
        }
        let s = self.hi + x;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (x - bp);
        let lo = self.lo + err;
        self.hi = s + lo;
        self.lo = lo - (self.hi - s);
    }

    fn div(&self, d: f64) -> f64 {
        if !self.hi.is_finite() {
            return self.hi / d;
        }
        let q = self.hi / d;
        let r = (-q).mul_add(d, self.hi);
        q + (r + self.lo) / d
    }
}

pub fn estimate_exponents(orbit: &Orbit, tail_fraction: f64) -> Result<ExponentEstimate> {
    let horizon = orbit.horizon();
    if horizon < MIN_ESTIMATE_HORIZON {
        return Err(LabError::Config(format!(
            "exponent estimation needs a horizon of at least {MIN_ESTIMATE_HORIZON}, got {horizon}"
        )));
    }
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(LabError::Config(format!(
            "tail fraction must lie in (0, 1), got {tail_fraction}"
        )));
    }
    let series = finite_time_exponents(orbit);
    let tail_start = ((tail_fraction * horizon as f64).ceil() as usize).clamp(1, horizon);
    let tail = &series[tail_start - 1..];
    if tail.contains(&f64::NEG_INFINITY) {
        let step = orbit.first_zero_derivative().unwrap_or(tail_start - 1);
        return Err(LabError::Sentinel {
            step,
            estimate: Box::new(ExponentEstimate {
                finite_time_series: series,
                upper: f64::NEG_INFINITY,
                lower: f64::NEG_INFINITY,
                tail_start,
                horizon,
                converged: false,
                oscillation_width: f64::NAN,
            }),
        });
    }
    let (lower, upper) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    let oscillation_width = upper - lower;
    Ok(ExponentEstimate {
        finite_time_series: series,
        upper,
        lower,
        tail_start,
        horizon,
        converged: oscillation_width <= CONVERGENCE_TOL,
        oscillation_width,
    })
}

/// Iterate and estimate in one call.
pub fn exponents_at(seq: &MapSequence, x0: f64, horizon: usize, tail_fraction: f64) -> Result<ExponentEstimate> {
    estimate_exponents(&iterate_orbit(seq, x0, horizon)?, tail_fraction)
}

/// Outcome of comparing the exponent at `x0` with that of the shifted system
/// at `x_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftExponentCheck {
    /// `|S_N / N - S'_{N-k} / (N - k)|`.
    pub discrepancy: f64,
    /// `(|S_k| + k max_n |S_n / n|) / (N - k)`, the finite-horizon allowance
    /// for the `k` leading terms.
    pub edge_bound: f64,
}

/// Compares the finite-time exponent of the original system at step `N` with
/// that of `g_n = f_{n+k}` started at `x_k` over `N - k` steps.
pub fn shift_exponent_check(seq: &MapSequence, x0: f64, k: usize, horizon: usize) -> Result<ShiftExponentCheck> {
    if k == 0 || k >= horizon {
        return Err(LabError::Precondition(format!(
            "shift k must satisfy 1 <= k < N, got k = {k}, N = {horizon}"
        )));
    }
    let original = iterate_orbit(seq, x0, horizon)?;
    let shifted = iterate_orbit(&seq.shift(k as u64), original.points()[k], horizon - k)?;
    for orbit in [&original, &shifted] {
        if let Some(step) = orbit.first_zero_derivative() {
            return Err(LabError::Sentinel {
                step,
                estimate: Box::new(ExponentEstimate {
                    finite_time_series: finite_time_exponents(orbit),
                    upper: f64::NEG_INFINITY,
                    lower: f64::NEG_INFINITY,
                    tail_start: 1,
                    horizon: orbit.horizon(),
                    converged: false,
                    oscillation_width: f64::NAN,
                }),
            });
        }
    }
    let a_full = original.partial_sum(horizon) / horizon as f64;
    let a_shift = shifted.partial_sum(horizon - k) / (horizon - k) as f64;
    let max_abs = finite_time_exponents(&original)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ShiftExponentCheck {
        discrepancy: (a_full - a_shift).abs(),
        edge_bound: (original.partial_sum(k).abs() + k as f64 * max_abs) / (horizon - k) as f64,
    })
}
