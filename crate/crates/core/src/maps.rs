//! Sequences of interval self-maps `{f_n}` and their per-step evaluators.

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::params::ParamSequence;

/// Uniform grid size used by the constructor's self-map check.
pub const SELF_MAP_GRID: usize = 10_000;
/// Indices checked by the constructor when the parameters are aperiodic.
pub const APERIODIC_VALIDATION_INDICES: u64 = 64;
/// Longest exact period the validators will walk in full.
pub const MAX_EXACT_PERIOD: u64 = 4096;

const DERIV_CHECK_GRID: usize = 100;
const DERIV_CHECK_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Smoothness {
    C1,
    C2,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `f_n(x) = r_n x (1 - x)`.
    Logistic(ParamSequence),
    /// `f_n(x) = slope_n x + intercept_n`.
    Affine {
        slope: ParamSequence,
        intercept: ParamSequence,
    },
    /// `f_n(x) = sum_d c_{d,n} x^d`, coefficient sequences in increasing degree.
    Polynomial(Vec<ParamSequence>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Logistic(_) => "logistic",
            Family::Affine { .. } => "affine",
            Family::Polynomial(_) => "polynomial",
        }
    }

    fn param_sequences(&self) -> Vec<&ParamSequence> {
        match self {
            Family::Logistic(r) => vec![r],
            Family::Affine { slope, intercept } => vec![slope, intercept],
            Family::Polynomial(c) => c.iter().collect(),
        }
    }

    fn shifted(&self, k: u64) -> Self {
        match self {
            Family::Logistic(r) => Family::Logistic(r.shifted(k)),
            Family::Affine { slope, intercept } => Family::Affine {
                slope: slope.shifted(k),
                intercept: intercept.shifted(k),
            },
            Family::Polynomial(c) => Family::Polynomial(c.iter().map(|p| p.shifted(k)).collect()),
        }
    }
}

/// One map `f_n` with its parameters resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum StepMap {
    Logistic { r: f64 },
    Affine { slope: f64, intercept: f64 },
    Polynomial(Vec<f64>),
}

impl StepMap {
    /// Closed-form value, not clamped to any domain.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            StepMap::Logistic { r } => r * x * (1.0 - x),
            StepMap::Affine { slope, intercept } => slope * x + intercept,
            StepMap::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * x + a),
        }
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        match self {
            StepMap::Logistic { r } => r * (1.0 - 2.0 * x),
            StepMap::Affine { slope, .. } => *slope,
            StepMap::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (d, &a)| acc * x + d as f64 * a),
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        match self {
            StepMap::Logistic { r } => -2.0 * r,
            StepMap::Affine { .. } => 0.0,
            StepMap::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (d, &a)| acc * x + (d * (d - 1)) as f64 * a),
        }
    }

    /// Zeros of the first derivative where they are known in closed form.
    pub fn critical_points(&self) -> Vec<f64> {
        match self {
            StepMap::Logistic { .. } => vec![0.5],
            StepMap::Affine { .. } => Vec::new(),
            StepMap::Polynomial(c) => match c.as_slice() {
                [_, b, a] if *a != 0.0 => vec![-b / (2.0 * a)],
                _ => Vec::new(),
            },
        }
    }

    /// `f_n(x)` clamped into `domain`; the clamp only absorbs roundoff for
    /// validated self-maps.
    #[inline]
    pub fn apply(&self, x: f64, domain: &Interval) -> f64 {
        domain.clamp(self.value(x))
    }
}

/// A validated sequence of self-maps of a closed interval.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MapSequence {
    domain: Interval,
    family: Family,
    smoothness: Smoothness,
}

impl MapSequence {
    /// Builds the sequence after checking that every map sends a grid of the
    /// domain (plus endpoints and critical points) into the domain, and that
    /// the closed-form derivative matches a central difference.
    pub fn new(domain: Interval, family: Family, smoothness: Smoothness) -> Result<Self> {
        if let Family::Polynomial(c) = &family {
            if c.is_empty() {
                return Err(LabError::Config("polynomial needs at least one coefficient".into()));
            }
        }
        let seq = Self {
            domain,
            family,
            smoothness,
        };
        seq.validate_self_map()?;
        seq.validate_derivatives()?;
        Ok(seq)
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    #[inline]
    pub fn step(&self, n: u64) -> StepMap {
        match &self.family {
            Family::Logistic(r) => StepMap::Logistic { r: r.value(n) },
            Family::Affine { slope, intercept } => StepMap::Affine {
                slope: slope.value(n),
                intercept: intercept.value(n),
            },
            Family::Polynomial(c) => StepMap::Polynomial(c.iter().map(|p| p.value(n)).collect()),
        }
    }

    pub fn evaluate(&self, n: u64, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(self.step(n).apply(x, &self.domain))
    }

    pub fn deriv1(&self, n: u64, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(self.step(n).deriv1(x))
    }

    pub fn deriv2(&self, n: u64, x: f64) -> Result<f64> {
        self.require_c2()?;
        self.domain.check(x)?;
        Ok(self.step(n).deriv2(x))
    }

    pub fn require_c2(&self) -> Result<()> {
        match self.smoothness {
            Smoothness::C2 => Ok(()),
            Smoothness::C1 => Err(LabError::Smoothness(
                "second derivative requested from a C1 map sequence".into(),
            )),
        }
    }

    /// The system `g_n := f_{n+k}`, started at step `k` of the original.
    pub fn shift(&self, k: u64) -> Self {
        Self {
            domain: self.domain,
            family: self.family.shifted(k),
            smoothness: self.smoothness,
        }
    }

    /// Common period of all parameter sequences, when every one is periodic.
    pub fn index_period(&self) -> Option<u64> {
        self.family
            .param_sequences()
            .iter()
            .try_fold(1u64, |acc, p| lcm(acc, p.period()?))
    }

    /// Index count for a sup/inf over `n`: one full period when it is short
    /// enough (exact), otherwise `default` (sampled).
    pub fn index_horizon(&self, default: u64) -> (u64, bool) {
        match self.index_period() {
            Some(p) if p <= MAX_EXACT_PERIOD => (p, true),
            _ => (default.max(1), false),
        }
    }

    /// `inf_n |f_n'(x)|` over all `n >= 0`, derived from parameter bounds for
    /// families where it separates; `None` when no closed form exists.
    pub fn derivative_abs_infimum(&self, x: f64) -> Option<f64> {
        match &self.family {
            Family::Logistic(r) => Some(r.bounds().0.abs() * (1.0 - 2.0 * x).abs()),
            Family::Affine { slope, .. } => {
                let (lo, hi) = slope.bounds();
                Some(if lo <= 0.0 && hi >= 0.0 {
                    0.0
                } else {
                    lo.abs().min(hi.abs())
                })
            }
            Family::Polynomial(_) => None,
        }
    }

    /// An upper bound on `sup_n sup_x |f_n''(x)|` from parameter bounds.
    /// Every parameter kind is bounded, so this is always finite.
    pub fn second_derivative_sup_bound(&self) -> f64 {
        let sup_abs = |p: &ParamSequence| {
            let (lo, hi) = p.bounds();
            lo.abs().max(hi.abs())
        };
        match &self.family {
            Family::Logistic(r) => 2.0 * sup_abs(r),
            Family::Affine { .. } => 0.0,
            Family::Polynomial(c) => {
                let xmax = self.domain.lo().abs().max(self.domain.hi().abs());
                c.iter()
                    .enumerate()
                    .skip(2)
                    .map(|(d, p)| (d * (d - 1)) as f64 * sup_abs(p) * xmax.powi(d as i32 - 2))
                    .sum()
            }
        }
    }

    /// Upper bound on `sup_n sup_x |f_n'(x)|`.
    pub fn first_derivative_sup_bound(&self) -> f64 {
        let sup_abs = |p: &ParamSequence| {
            let (lo, hi) = p.bounds();
            lo.abs().max(hi.abs())
        };
        let xmax = self.domain.lo().abs().max(self.domain.hi().abs());
        match &self.family {
            Family::Logistic(r) => {
                let edge = (1.0 - 2.0 * self.domain.lo())
                    .abs()
                    .max((1.0 - 2.0 * self.domain.hi()).abs());
                sup_abs(r) * edge
            }
            Family::Affine { slope, .. } => sup_abs(slope),
            Family::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(d, p)| d as f64 * sup_abs(p) * xmax.powi(d as i32 - 1))
                .sum(),
        }
    }

    fn validation_indices(&self) -> u64 {
        match self.index_period() {
            Some(p) if p <= MAX_EXACT_PERIOD => p,
            _ => APERIODIC_VALIDATION_INDICES,
        }
    }

    fn validate_self_map(&self) -> Result<()> {
        let slack = 1e-12 * self.domain.width();
        let grid = self.domain.grid(SELF_MAP_GRID);
        for n in 0..self.validation_indices() {
            let f = self.step(n);
            let extra = f.critical_points().into_iter().filter(|c| self.domain.contains(*c));
            for x in grid.iter().copied().chain(extra) {
                let image = f.value(x);
                if !(image >= self.domain.lo() - slack && image <= self.domain.hi() + slack) {
                    return Err(LabError::SelfMap { n, x, image });
                }
            }
        }
        Ok(())
    }

    fn validate_derivatives(&self) -> Result<()> {
        let h = 1e-5 * self.domain.width();
        for n in 0..self.validation_indices() {
            let f = self.step(n);
            for x in self.domain.grid(DERIV_CHECK_GRID) {
                let numeric = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
                let closed = f.deriv1(x);
                if (numeric - closed).abs() > DERIV_CHECK_RTOL * closed.abs().max(1.0) {
                    return Err(LabError::DerivativeMismatch { n, x, closed, numeric });
                }
            }
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    (a / gcd(a, b)).checked_mul(b)
}
