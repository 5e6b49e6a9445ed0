//! Built-in map families.

use crate::error::{LabError, Result};
use crate::interval::Interval;
use crate::maps::{Family, MapSequence, Smoothness};
use crate::params::ParamSequence;

/// Non-autonomous logistic system `x_{n+1} = r_n x_n (1 - x_n)` on `[0, 1]`.
///
/// Requires `0 < r_n <= 4` for every `n`, checked against the exact
/// parameter bounds.
pub fn logistic(params: ParamSequence) -> Result<MapSequence> {
    let (lo, hi) = params.bounds();
    if !(lo > 0.0) {
        return Err(LabError::ParamRange {
            value: lo,
            allowed: "(0, 4]",
        });
    }
    if hi > 4.0 {
        return Err(LabError::ParamRange {
            value: hi,
            allowed: "(0, 4]",
        });
    }
    MapSequence::new(Interval::unit(), Family::Logistic(params), Smoothness::C2)
}

/// `x_{n+1} = slope_n x_n + intercept_n` on `domain`. Exponents, envelopes and
/// moduli of this family are known in closed form.
pub fn affine(slopes: ParamSequence, intercepts: ParamSequence, domain: Interval) -> Result<MapSequence> {
    MapSequence::new(
        domain,
        Family::Affine {
            slope: slopes,
            intercept: intercepts,
        },
        Smoothness::C2,
    )
}

/// Autonomous affine map on `[0, 1]`.
pub fn affine_constant(slope: f64, intercept: f64) -> Result<MapSequence> {
    affine(
        ParamSequence::constant(slope)?,
        ParamSequence::constant(intercept)?,
        Interval::unit(),
    )
}

pub fn polynomial(coefficients: Vec<ParamSequence>, domain: Interval, smoothness: Smoothness) -> Result<MapSequence> {
    MapSequence::new(domain, Family::Polynomial(coefficients), smoothness)
}
