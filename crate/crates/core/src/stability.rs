//! Exponential stability: the discrete Gronwall bound, Lyapunov-stability
//! probing, and explicit certificates of the form
//! `|y_n - x_n| <= eta exp(lambda n)` for all `|y_0 - x_0| < delta`.
//!
//! A certificate is built from exponent estimates `lambda(x0)` (upper) and
//! `lambda_0(x0)` (lower) with `2 lambda(x0) < lambda_0(x0) < 0`:
//!
//! ```text
//! eps0        in (0, (lambda_0 - 2 lambda) / 3)
//! lambda      = lambda(x0) + eps0
//! lambda~     = 2 lambda(x0) - lambda_0(x0) + 3 eps0
//! l_k         = k (lambda(x0) - lambda_0(x0) + 2 eps0)
//! C0          = max(1, max_{k<=n} |a_{n-1}...a_k| / exp(lambda (n-k) + l_k)),  a_i = f_i'(x_i)
//! D_eta       = M C0 eta exp(-2 lambda) exp(lambda~) / (2 (1 - exp(lambda~)))
//! delta       = eta exp(-D_eta) / C0
//! ```
//!
//! `M` bounds `|f_n''|` uniformly. `C0` is taken over a finite horizon; pairs
//! beyond it are covered only asymptotically.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::hypotheses::{second_derivative_bound, DEFAULT_GRID_POINTS, DEFAULT_INDEX_HORIZON};
use crate::lyapunov::ExponentEstimate;
use crate::maps::MapSequence;
use crate::orbit::{iterate_orbit, trajectory, Orbit};
use crate::par::map_ordered;

pub const DEFAULT_C0_HORIZON: usize = 1000;
pub const MIN_ENVELOPE_SAMPLES: usize = 10;

/// `b_n = B exp(sum_{k=1}^n mu_k)` for `n = 0..=N`, where `mu[k - 1]` holds `mu_k`.
///
/// Any nonnegative `z_n <= B + sum_{k=1}^n mu_k z_{k-1}` satisfies `z_n <= b_n`.
pub fn discrete_gronwall_bound(b: f64, mu: &[f64], n: usize) -> Result<Vec<f64>> {
    if !(b >= 0.0) {
        return Err(LabError::NegativeInput(format!("B = {b}")));
    }
    if mu.len() < n {
        return Err(LabError::Config(format!(
            "need {n} growth coefficients, got {}",
            mu.len()
        )));
    }
    if let Some((k, m)) = mu[..n].iter().enumerate().find(|(_, m)| !(**m >= 0.0)) {
        return Err(LabError::NegativeInput(format!("mu_{} = {m}", k + 1)));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut sum = 0.0;
    out.push(b);
    for m in &mu[..n] {
        sum += m;
        out.push(b * sum.exp());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapResult {
    pub gap: f64,
    pub max_separation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovStabilityResult {
    pub eta: f64,
    pub horizon: usize,
    pub gaps: Vec<GapResult>,
    /// Largest tested gap such that it and every smaller gap pass.
    pub witness_delta: Option<f64>,
    pub pass: bool,
}

/// `x0 + d` rounded toward `x0`, so that `|result - x0| <= |d|` exactly.
fn offset_within(x0: f64, d: f64) -> f64 {
    let y = x0 + d;
    if (y - x0).abs() <= d.abs() {
        y
    } else if y > x0 {
        y.next_down()
    } else {
        y.next_up()
    }
}

/// Probes `x0 ± g` for each gap and checks `sup_n |w_n| <= eta`.
pub fn lyapunov_stability_test(
    seq: &MapSequence,
    x0: f64,
    eta: f64,
    gaps: &[f64],
    horizon: usize,
) -> Result<LyapunovStabilityResult> {
    seq.domain().check(x0)?;
    if !(eta > 0.0) {
        return Err(LabError::Config(format!("eta must be positive, got {eta}")));
    }
    if gaps.is_empty() || gaps.iter().any(|g| !(*g > 0.0)) {
        return Err(LabError::Config(
            "gaps must be a nonempty list of positive reals".into(),
        ));
    }
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let base = trajectory(seq, x0, horizon)?;
    let domain = *seq.domain();
    let results = map_ordered(&sorted, |&gap| {
        let mut worst = 0.0f64;
        for y0 in [offset_within(x0, gap), offset_within(x0, -gap)] {
            let y0 = domain.clamp(y0);
            if y0 == x0 {
                continue;
            }
            let mut y = y0;
            worst = worst.max((y - x0).abs());
            for n in 0..horizon {
                y = seq.step(n as u64).apply(y, &domain);
                worst = worst.max((y - base[n + 1]).abs());
            }
        }
        GapResult {
            gap,
            max_separation: worst,
            pass: worst <= eta,
        }
    });
    let witness_delta = results.iter().take_while(|r| r.pass).last().map(|r| r.gap);
    let pass = results.iter().all(|r| r.pass);
    Ok(LyapunovStabilityResult {
        eta,
        horizon,
        gaps: results,
        witness_delta,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub x0: f64,
    /// Upper exponent estimate, nats/step.
    pub lambda_upper: f64,
    /// Lower exponent estimate, nats/step.
    pub lambda_lower: f64,
    pub epsilon0: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
    /// Uniform bound on `|f_n''|`.
    pub m: f64,
    pub c0: f64,
    pub c0_horizon: usize,
    pub eta: f64,
    pub d_eta: f64,
    pub delta: f64,
    pub exponent_horizon: usize,
}

impl StabilityCertificate {
    /// Sign and ordering invariants plus bitwise recomputation of `D_eta` and `delta`.
    pub fn is_consistent(&self) -> bool {
        let (d_eta, delta) = envelope_constants(self.m, self.c0, self.eta, self.lambda, self.lambda_tilde);
        self.lambda < 0.0
            && self.lambda_tilde < 0.0
            && self.c0 >= 1.0
            && self.delta > 0.0
            && self.d_eta >= 0.0
            && self.epsilon0 > 0.0
            && self.epsilon0 < (self.lambda_lower - 2.0 * self.lambda_upper) / 3.0
            && d_eta.to_bits() == self.d_eta.to_bits()
            && delta.to_bits() == self.delta.to_bits()
    }

    /// `eta exp(lambda n)`.
    pub fn bound(&self, n: usize) -> f64 {
        self.eta * (self.lambda * n as f64).exp()
    }
}

/// `(D_eta, delta)` from the certificate's primary constants.
pub fn envelope_constants(m: f64, c0: f64, eta: f64, lambda: f64, lambda_tilde: f64) -> (f64, f64) {
    let et = lambda_tilde.exp();
    let d_eta = 0.5 * m * c0 * eta * (-2.0 * lambda).exp() * et / (1.0 - et);
    let delta = (-d_eta).exp() * eta / c0;
    (d_eta, delta)
}

/// Default `eps0 = (lambda_0 - 2 lambda) / 6`, half the admissible supremum.
pub fn default_epsilon0(exponents: &ExponentEstimate) -> f64 {
    (exponents.lower - 2.0 * exponents.upper) / 6.0
}

fn check_exponent_gate(exponents: &ExponentEstimate) -> Result<()> {
    let (upper, lower) = (exponents.upper, exponents.lower);
    if !(upper.is_finite() && lower.is_finite()) {
        return Err(LabError::Hypothesis(format!(
            "exponents must be finite, got upper = {upper}, lower = {lower}"
        )));
    }
    if !(upper < 0.0) {
        return Err(LabError::Hypothesis(format!(
            "upper exponent must be negative, got {upper}"
        )));
    }
    if !(2.0 * upper < lower) {
        return Err(LabError::Hypothesis(format!(
            "need 2 * upper < lower, got 2 * {upper} >= {lower}"
        )));
    }
    Ok(())
}

pub fn build_certificate(
    seq: &MapSequence,
    x0: f64,
    eta: f64,
    exponents: &ExponentEstimate,
    horizon_c0: usize,
) -> Result<StabilityCertificate> {
    check_exponent_gate(exponents)?;
    build_certificate_with_epsilon(seq, x0, eta, exponents, horizon_c0, default_epsilon0(exponents))
}

pub fn build_certificate_with_epsilon(
    seq: &MapSequence,
    x0: f64,
    eta: f64,
    exponents: &ExponentEstimate,
    horizon_c0: usize,
    epsilon0: f64,
) -> Result<StabilityCertificate> {
    check_exponent_gate(exponents)?;
    seq.require_c2()?;
    seq.domain().check(x0)?;
    if !(eta > 0.0) {
        return Err(LabError::Config(format!("eta must be positive, got {eta}")));
    }
    let (upper, lower) = (exponents.upper, exponents.lower);
    if !(epsilon0 > 0.0 && epsilon0 < (lower - 2.0 * upper) / 3.0) {
        return Err(LabError::Config(format!(
            "epsilon0 = {epsilon0} outside (0, {})",
            (lower - 2.0 * upper) / 3.0
        )));
    }
    let lambda = upper + epsilon0;
    let lambda_tilde = 2.0 * upper - lower + 3.0 * epsilon0;
    let (indices, _) = seq.index_horizon(DEFAULT_INDEX_HORIZON);
    let m = second_derivative_bound(seq, seq.domain().width() / DEFAULT_GRID_POINTS as f64, indices)?;
    let orbit = iterate_orbit(seq, x0, horizon_c0)?;
    let c0 = compute_c0(&orbit, lambda, upper, lower, epsilon0, horizon_c0)?;
    let (d_eta, delta) = envelope_constants(m, c0, eta, lambda, lambda_tilde);
    Ok(StabilityCertificate {
        x0,
        lambda_upper: upper,
        lambda_lower: lower,
        epsilon0,
        lambda,
        lambda_tilde,
        m,
        c0,
        c0_horizon: horizon_c0,
        eta,
        d_eta,
        delta,
        exponent_horizon: exponents.horizon,
    })
}

/// Smallest `C0 >= 1` with `|a_{n-1}...a_k| <= C0 exp(lambda (n-k) + l_k)` for
/// all `0 <= k <= n <= horizon`, where `a_i = f_i'(x_i)` and
/// `l_k = k (lambda_upper - lambda_lower + 2 eps0)`.
///
/// Works in log space: the log-ratio splits as `T_n - U_k` with
/// `T_n = S_n - lambda n` and `U_k = T_k + l_k`, so a running maximum of
/// `-U_k` gives the answer in O(horizon).
pub fn compute_c0(
    orbit: &Orbit,
    lambda: f64,
    lambda_upper: f64,
    lambda_lower: f64,
    epsilon0: f64,
    horizon: usize,
) -> Result<f64> {
    if horizon > orbit.horizon() {
        return Err(LabError::Config(format!(
            "C0 horizon {horizon} exceeds orbit horizon {}",
            orbit.horizon()
        )));
    }
    let logs = &orbit.log_derivs()[..horizon];
    if let Some(step) = logs.iter().position(|l| *l == f64::NEG_INFINITY) {
        return Err(LabError::Hypothesis(format!(
            "derivative vanishes on the orbit at step {step}"
        )));
    }
    let rho = lambda_upper - lambda_lower + 2.0 * epsilon0;
    // T_n accumulated with Neumaier compensation
    let (mut t, mut comp) = (0.0f64, 0.0f64);
    let mut best_neg_u = 0.0f64; // -U_0 = 0
    let mut best = 0.0f64; // log-ratio at k = n = 0
    for (i, l) in logs.iter().enumerate() {
        let inc = l - lambda;
        let s = t + inc;
        comp += if t.abs() >= inc.abs() {
            (t - s) + inc
        } else {
            (inc - s) + t
        };
        t = s;
        let n = (i + 1) as f64;
        let t_n = t + comp;
        best_neg_u = best_neg_u.max(-(t_n + n * rho));
        best = best.max(t_n + best_neg_u);
    }
    Ok(best.exp().max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeVerification {
    /// Every `|w_n|` is within 4 ulp of the bound or below it.
    pub pass: bool,
    /// `min (eta exp(lambda n) - |w_n|)` over samples and steps.
    pub margin: f64,
    /// `min (1 - |w_n| / (eta exp(lambda n)))`, the same test without the decay
    /// scale, over steps where the bound is a normal float.
    pub relative_margin: f64,
    pub samples_checked: usize,
    /// Initial condition attaining the margin.
    pub worst_y0: f64,
    pub horizon: usize,
}

struct EnvelopeAcc {
    margin: f64,
    relative: f64,
    within: bool,
}

impl Default for EnvelopeAcc {
    fn default() -> Self {
        EnvelopeAcc {
            margin: f64::INFINITY,
            relative: f64::INFINITY,
            within: true,
        }
    }
}

impl EnvelopeAcc {
    // Deep in a contracting regime both orbits reach subnormals, where the
    // arithmetic only resolves multiples of 5e-324; allow 4 ulp of the bound.
    fn push(&mut self, w: f64, bound: f64) {
        self.margin = self.margin.min(bound - w);
        self.within &= w <= bound + 4.0 * (bound.next_up() - bound);
        if bound >= f64::MIN_POSITIVE {
            self.relative = self.relative.min(1.0 - w / bound);
        }
    }
}

/// Stratified midpoints of `(x0 - delta, x0 + delta)` intersected with the
/// domain, excluding `x0`.
pub fn envelope_samples(seq: &MapSequence, x0: f64, delta: f64, count: usize) -> Vec<f64> {
    let a = (x0 - delta).max(seq.domain().lo());
    let b = (x0 + delta).min(seq.domain().hi());
    let width = b - a;
    (0..count)
        .map(|i| a + (i as f64 + 0.5) * width / count as f64)
        .filter(|y| *y != x0 && *y > a && *y < b)
        .collect()
}

/// Checks `|w_n| <= eta exp(lambda n)` for every sample and every `n <= horizon`.
pub fn verify_envelope(
    seq: &MapSequence,
    x0: f64,
    cert: &StabilityCertificate,
    sample_count: usize,
    horizon: usize,
) -> Result<EnvelopeVerification> {
    seq.domain().check(x0)?;
    if sample_count < MIN_ENVELOPE_SAMPLES {
        return Err(LabError::Config(format!(
            "at least {MIN_ENVELOPE_SAMPLES} samples are required, got {sample_count}"
        )));
    }
    let ys = envelope_samples(seq, x0, cert.delta, sample_count);
    if ys.is_empty() {
        return Err(LabError::Config("no admissible envelope samples".into()));
    }
    let base = trajectory(seq, x0, horizon)?;
    let bounds: Vec<f64> = (0..=horizon).map(|n| cert.bound(n)).collect();
    let domain = *seq.domain();
    let margins = map_ordered(&ys, |&y0| {
        let mut y = y0;
        let mut acc = EnvelopeAcc::default();
        acc.push((y0 - x0).abs(), bounds[0]);
        for n in 0..horizon {
            y = seq.step(n as u64).apply(y, &domain);
            acc.push((y - base[n + 1]).abs(), bounds[n + 1]);
        }
        acc
    });
    let (worst, margin) =
        margins.iter().map(|m| m.margin).enumerate().fold(
            (0, f64::INFINITY),
            |(wi, wm), (i, m)| if m < wm { (i, m) } else { (wi, wm) },
        );
    let relative_margin = margins.iter().map(|m| m.relative).fold(f64::INFINITY, f64::min);
    Ok(EnvelopeVerification {
        pass: margins.iter().all(|m| m.within),
        margin,
        relative_margin,
        samples_checked: ys.len(),
        worst_y0: ys[worst],
        horizon,
    })
}

/// `(n, |w_n|, eta exp(lambda n))` rows for one sample.
pub fn envelope_series(
    seq: &MapSequence,
    x0: f64,
    y0: f64,
    cert: &StabilityCertificate,
    horizon: usize,
) -> Result<Vec<(usize, f64, f64)>> {
    let seps = crate::orbit::separations(seq, x0, y0, horizon)?;
    Ok(seps
        .into_iter()
        .enumerate()
        .map(|(n, w)| (n, w, cert.bound(n)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certification {
    Certified {
        certificate: StabilityCertificate,
        verification: EnvelopeVerification,
        /// The first attempt failed and `eps0` was halved.
        retried: bool,
    },
    Indeterminate {
        attempts: Vec<(StabilityCertificate, EnvelopeVerification)>,
    },
}

/// Builds a certificate with the default `eps0` and verifies it; on failure
/// retries once with `eps0` halved before giving up.
pub fn certify(
    seq: &MapSequence,
    x0: f64,
    eta: f64,
    exponents: &ExponentEstimate,
    horizon_c0: usize,
    sample_count: usize,
    horizon: usize,
) -> Result<Certification> {
    let eps = default_epsilon0(exponents);
    let mut attempts = Vec::new();
    for (retried, eps0) in [(false, eps), (true, eps / 2.0)] {
        let certificate = build_certificate_with_epsilon(seq, x0, eta, exponents, horizon_c0, eps0)?;
        let verification = verify_envelope(seq, x0, &certificate, sample_count, horizon)?;
        if verification.pass {
            return Ok(Certification::Certified {
                certificate,
                verification,
                retried,
            });
        }
        attempts.push((certificate, verification));
    }
    Ok(Certification::Indeterminate { attempts })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub c: f64,
    pub lambda_fit: f64,
    /// `max_n (|w_n| - C exp(-lambda_fit n))` clipped at 0, with a 4-ulp allowance.
    pub residual: f64,
    /// `lambda_fit > 0`.
    pub holds: bool,
}

/// Fits `|w_n| <= C exp(-lambda_fit n)` with `C = |w_0|` and the largest
/// admissible rate. Zero separations after `n = 0` do not constrain the rate.
pub fn fit_envelope(separations: &[f64]) -> Result<EnvelopeFit> {
    let (&w0, rest) = separations
        .split_first()
        .ok_or_else(|| LabError::EmptyInput("no separations to fit".into()))?;
    if separations.iter().any(|w| !(*w >= 0.0)) {
        return Err(LabError::NegativeInput("separations must be nonnegative".into()));
    }
    let lambda_fit = if w0 == 0.0 {
        if rest.iter().all(|w| *w == 0.0) {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        rest.iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| -(w / w0).ln() / (i + 1) as f64)
            .fold(f64::INFINITY, f64::min)
    };
    let slack = 1.0 + 4.0 * f64::EPSILON;
    let residual = separations
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let bound = if n == 0 {
                w0
            } else {
                w0 * (-lambda_fit * n as f64).exp()
            };
            let bound = if bound.is_nan() { 0.0 } else { bound };
            (w - bound * slack).max(0.0)
        })
        .fold(0.0, f64::max);
    Ok(EnvelopeFit {
        c: w0,
        lambda_fit,
        residual,
        holds: lambda_fit > 0.0,
    })
}
