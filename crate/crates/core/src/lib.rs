//! Numerical laboratory for non-autonomous discrete systems `x_{n+1} = f_n(x_n)`
//! on a closed real interval.
//!
//! The crate is organized bottom-up:
//!
//! - [`interval`], [`params`], [`maps`] and [`orbit`] define the systems and
//!   their trajectories,
//! - [`systems`] provides the built-in logistic and affine families,
//! - [`lyapunov`] estimates upper and lower Lyapunov exponents from finite
//!   orbits,
//! - [`sensitivity`] probes strong sensitivity empirically,
//! - [`stability`] builds and verifies exponential stability certificates,
//! - [`hypotheses`] checks the regularity assumptions behind both.
//!
//! All reals are `f64` and the metric is `|x - y|`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hypotheses;
pub mod interval;
pub mod lyapunov;
pub mod maps;
pub mod orbit;
pub mod params;
pub mod sensitivity;
pub mod stability;
pub mod systems;

mod par;

pub use error::{LabError, Result};
pub use hypotheses::{CheckStatus, HypothesisReport, Theorem};
pub use interval::Interval;
pub use lyapunov::ExponentEstimate;
pub use maps::{Family, MapSequence, Smoothness, StepMap};
pub use orbit::{iterate_orbit, Orbit};
pub use params::{ParamKind, ParamSequence};
pub use sensitivity::{SensitivityReport, Verdict};
pub use stability::{Certification, StabilityCertificate};
