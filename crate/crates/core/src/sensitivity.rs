//! Empirical tests for strong sensitivity at a point and on a set.
//!
//! Strong sensitivity quantifies over every `y0 != x0` in a neighborhood; the
//! tests here sample geometrically spaced probes `x0 ± radius 2^{-j}` and
//! iterate each pair exactly. A missing escape within the horizon cannot
//! refute sensitivity, hence the three-way [`Verdict`].

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::maps::MapSequence;
use crate::orbit::{separations, trajectory};
use crate::par::map_ordered;

pub const MIN_PROBES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    StronglySensitive,
    NotDetected,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub y0: f64,
    pub initial_gap: f64,
    /// First `N >= 1` with `|f_0^N(y0) - f_0^N(x0)| > delta`.
    pub escape_time: Option<usize>,
    pub max_separation: f64,
    /// `|w_n|` for `n = 0..=horizon`.
    #[serde(skip)]
    pub separations: Vec<f64>,
}

impl ProbeResult {
    /// Last-quartile maximum of the separations exceeds the first-quartile maximum.
    pub fn still_growing(&self) -> bool {
        let len = self.separations.len();
        let q = (len / 4).max(1);
        let head = self.separations[..q].iter().fold(0.0f64, |m, v| m.max(*v));
        let tail = self.separations[len - q..].iter().fold(0.0f64, |m, v| m.max(*v));
        tail > head
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub x0: f64,
    pub delta: f64,
    pub radius: f64,
    pub horizon: usize,
    pub probes: Vec<ProbeResult>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetSensitivityReport {
    pub delta: f64,
    pub reports: Vec<SensitivityReport>,
    pub verdict: Verdict,
}

/// Default candidate sensitivity constant: one twentieth of the domain width.
pub fn default_delta(seq: &MapSequence) -> f64 {
    seq.domain().width() / 20.0
}

/// `|w_n| = |y_n - x_n|` for `n = 0..=horizon`.
pub fn probe_separation(seq: &MapSequence, x0: f64, y0: f64, horizon: usize) -> Result<Vec<f64>> {
    if x0 == y0 {
        return Err(LabError::Precondition("probe must differ from x0".into()));
    }
    separations(seq, x0, y0, horizon)
}

/// Probe initial conditions `x0 + radius 2^{-j}`, `x0 - radius 2^{-j}` for
/// `j = 0, 1, ...` until `probe_count` distinct points inside the domain are
/// found. Next to an endpoint all probes lie on the admissible side.
pub fn probe_points(seq: &MapSequence, x0: f64, radius: f64, probe_count: usize) -> Vec<f64> {
    let domain = seq.domain();
    let mut out: Vec<f64> = Vec::with_capacity(probe_count);
    let mut step = radius;
    while out.len() < probe_count && x0 + step != x0 {
        for y in [x0 + step, x0 - step] {
            if out.len() < probe_count && domain.contains(y) && y != x0 && !out.contains(&y) {
                out.push(y);
            }
        }
        step *= 0.5;
    }
    out
}

pub fn strong_sensitivity_test(
    seq: &MapSequence,
    x0: f64,
    delta: f64,
    radius: f64,
    probe_count: usize,
    horizon: usize,
) -> Result<SensitivityReport> {
    seq.domain().check(x0)?;
    if !(delta > 0.0) || !(radius > 0.0) {
        return Err(LabError::Config(format!(
            "delta and radius must be positive, got {delta} and {radius}"
        )));
    }
    if probe_count < MIN_PROBES {
        return Err(LabError::Config(format!(
            "at least {MIN_PROBES} probes are required, got {probe_count}"
        )));
    }
    if horizon == 0 {
        return Err(LabError::Config("horizon must be at least 1".into()));
    }
    let ys = probe_points(seq, x0, radius, probe_count);
    if ys.is_empty() {
        return Err(LabError::Config(format!("every probe around {x0} clamps onto x0")));
    }
    let base = trajectory(seq, x0, horizon)?;
    let domain = *seq.domain();
    let probes = map_ordered(&ys, |&y0| {
        let mut y = y0;
        let mut seps = Vec::with_capacity(horizon + 1);
        seps.push((y0 - x0).abs());
        for n in 0..horizon {
            y = seq.step(n as u64).apply(y, &domain);
            seps.push((y - base[n + 1]).abs());
        }
        let escape_time = seps.iter().skip(1).position(|s| *s > delta).map(|i| i + 1);
        ProbeResult {
            y0,
            initial_gap: (y0 - x0).abs(),
            escape_time,
            max_separation: seps.iter().fold(0.0f64, |m, v| m.max(*v)),
            separations: seps,
        }
    });
    let verdict = classify(&probes);
    Ok(SensitivityReport {
        x0,
        delta,
        radius,
        horizon,
        probes,
        verdict,
    })
}

fn classify(probes: &[ProbeResult]) -> Verdict {
    let stuck: Vec<&ProbeResult> = probes.iter().filter(|p| p.escape_time.is_none()).collect();
    if stuck.is_empty() {
        Verdict::StronglySensitive
    } else if stuck.iter().any(|p| p.still_growing()) {
        Verdict::Undetermined
    } else {
        Verdict::NotDetected
    }
}

/// Runs the point test at every sample with one shared `delta`.
pub fn sensitivity_in_set_test(
    seq: &MapSequence,
    sample_points: &[f64],
    delta: f64,
    radius: f64,
    probe_count: usize,
    horizon: usize,
) -> Result<SetSensitivityReport> {
    if sample_points.is_empty() {
        return Err(LabError::EmptyInput("no sample points".into()));
    }
    let reports = sample_points
        .iter()
        .map(|&x0| strong_sensitivity_test(seq, x0, delta, radius, probe_count, horizon))
        .collect::<Result<Vec<_>>>()?;
    let verdict = if reports.iter().all(|r| r.verdict == Verdict::StronglySensitive) {
        Verdict::StronglySensitive
    } else if reports.iter().any(|r| r.verdict == Verdict::Undetermined) {
        Verdict::Undetermined
    } else {
        Verdict::NotDetected
    };
    Ok(SetSensitivityReport {
        delta,
        reports,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftReplay {
    pub k: usize,
    pub probes_checked: usize,
    /// Every replayed separation equals the original one bitwise.
    pub bitwise_equal: bool,
    pub pass: bool,
}

/// Replays each escaping probe with `N > k` through `g_n = f_{n+k}` from
/// `(x_k, f_0^k(y0))` and checks the separation at step `N - k`.
pub fn shift_sensitivity_check(seq: &MapSequence, k: usize, report: &SensitivityReport) -> Result<ShiftReplay> {
    if k == 0 {
        return Err(LabError::Precondition("shift k must be positive".into()));
    }
    let escaping: Vec<(&ProbeResult, usize)> = report
        .probes
        .iter()
        .filter_map(|p| p.escape_time.filter(|n| *n > k).map(|n| (p, n)))
        .collect();
    if escaping.is_empty() {
        return Err(LabError::Precondition(format!("no probe escapes after step {k}")));
    }
    let shifted = seq.shift(k as u64);
    let domain = *seq.domain();
    let mut bitwise_equal = true;
    let mut pass = true;
    for (probe, n_escape) in &escaping {
        let xs = trajectory(seq, report.x0, k)?;
        let ys = trajectory(seq, probe.y0, k)?;
        let (mut x, mut y) = (xs[k], ys[k]);
        for n in 0..n_escape - k {
            let g = shifted.step(n as u64);
            x = g.apply(x, &domain);
            y = g.apply(y, &domain);
        }
        let replayed = (y - x).abs();
        bitwise_equal &= replayed.to_bits() == probe.separations[*n_escape].to_bits();
        pass &= replayed > report.delta;
    }
    Ok(ShiftReplay {
        k,
        probes_checked: escaping.len(),
        bitwise_equal,
        pass: pass && bitwise_equal,
    })
}

/// `(δ_j, verdict)` for `δ_j = width 2^{-j}`, `j = 1..=levels`.
pub fn delta_scan(
    seq: &MapSequence,
    x0: f64,
    radius: f64,
    probe_count: usize,
    horizon: usize,
    levels: u32,
) -> Result<Vec<(f64, Verdict)>> {
    (1..=levels as i32)
        .map(|j| {
            let delta = seq.domain().width() * 0.5f64.powi(j);
            strong_sensitivity_test(seq, x0, delta, radius, probe_count, horizon).map(|r| (delta, r.verdict))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{affine_constant, logistic};
    use crate::ParamSequence;

    #[test]
    fn affine_probe_is_geometric() {
        let s = affine_constant(0.5, 0.0).unwrap();
        assert_eq!(
            probe_separation(&s, 0.0, 0.1, 3).unwrap(),
            vec![0.1, 0.05, 0.025, 0.0125]
        );
    }

    #[test]
    fn logistic_four_by_hand() {
        let s = logistic(ParamSequence::constant(4.0).unwrap()).unwrap();
        assert_eq!(probe_separation(&s, 0.0, 0.25, 2).unwrap(), vec![0.25, 0.75, 0.75]);
    }

    #[test]
    fn logistic_two_first_step() {
        let s = logistic(ParamSequence::constant(2.0).unwrap()).unwrap();
        let y0 = 1e-6;
        let w = probe_separation(&s, 0.0, y0, 1).unwrap();
        let exact = 2.0 * y0 * (1.0 - y0);
        assert!(((w[1] - exact) / exact).abs() < 1e-10);
        assert!(((w[1] - 2e-6) / 2e-6).abs() < 1e-5);
    }

    #[test]
    fn probes_at_left_endpoint_are_one_sided() {
        let s = logistic(ParamSequence::constant(2.0).unwrap()).unwrap();
        let ys = probe_points(&s, 0.0, 1e-3, 16);
        assert_eq!(ys.len(), 16);
        assert!(ys.iter().all(|y| *y > 0.0));
        assert_eq!(ys[0], 1e-3);
        assert_eq!(ys[15], 1e-3 * 0.5f64.powi(15));

        let ys = probe_points(&s, 0.5, 1e-3, 9);
        assert_eq!(ys.len(), 9);
        assert_eq!(&ys[..3], &[0.501, 0.499, 0.5005]);
    }

    #[test]
    fn periodic_logistic_is_strongly_sensitive_at_zero() {
        let s = logistic(ParamSequence::periodic(vec![2.0, 3.0, 4.0]).unwrap()).unwrap();
        let r = strong_sensitivity_test(&s, 0.0, 0.1, 1e-3, 16, 10_000).unwrap();
        assert_eq!(r.verdict, Verdict::StronglySensitive);
        for p in &r.probes {
            let n = p.escape_time.unwrap();
            let again = probe_separation(&s, 0.0, p.y0, n).unwrap();
            assert!(again[n] > r.delta);
            assert_eq!(again[n], p.separations[n]);
        }
    }

    #[test]
    fn contractions_are_not_detected() {
        let a = affine_constant(0.5, 0.0).unwrap();
        let r = strong_sensitivity_test(&a, 0.0, 0.01, 1e-3, 16, 500).unwrap();
        assert_eq!(r.verdict, Verdict::NotDetected);

        let l = logistic(ParamSequence::constant(0.6).unwrap()).unwrap();
        let r = strong_sensitivity_test(&l, 0.0, 0.01, 1e-3, 16, 10_000).unwrap();
        assert_eq!(r.verdict, Verdict::NotDetected);
        // oracle: |w_{n+1}| <= 0.6 |w_n| near the fixed point
        for p in &r.probes {
            for w in p.separations.windows(2) {
                assert!(w[1] <= 0.6 * w[0] + f64::EPSILON * w[0]);
            }
        }
    }

    #[test]
    fn slow_growth_is_undetermined() {
        let l = logistic(ParamSequence::constant(1.01).unwrap()).unwrap();
        let r = strong_sensitivity_test(&l, 0.0, 0.1, 1e-3, 8, 100).unwrap();
        assert_eq!(r.verdict, Verdict::Undetermined);
    }

    #[test]
    fn escape_time_lower_bound_at_expanding_fixed_point() {
        // |w_{n+1}| <= r |w_n| at x0 = 0, so escape needs at least ln(delta/w0)/ln r steps.
        for r in [1.5, 2.0, 3.0, 3.9] {
            let l = logistic(ParamSequence::constant(r).unwrap()).unwrap();
            let rep = strong_sensitivity_test(&l, 0.0, 0.05, 1e-3, 16, 2000).unwrap();
            for p in &rep.probes {
                let n = p.escape_time.expect("escapes") as f64;
                assert!(n >= ((0.05 / p.initial_gap).ln() / r.ln()).floor());
            }
        }
    }

    #[test]
    fn config_errors() {
        let s = logistic(ParamSequence::constant(2.0).unwrap()).unwrap();
        assert!(strong_sensitivity_test(&s, 0.0, 0.1, 1e-3, 4, 10).is_err());
        assert!(strong_sensitivity_test(&s, 0.0, 0.0, 1e-3, 8, 10).is_err());
        assert!(matches!(
            strong_sensitivity_test(&s, 2.0, 0.1, 1e-3, 8, 10),
            Err(LabError::Domain { .. })
        ));
        assert!(sensitivity_in_set_test(&s, &[], 0.1, 1e-3, 8, 10).is_err());
    }

    #[test]
    fn singleton_set_reduces_to_point() {
        let s = logistic(ParamSequence::periodic(vec![2.0, 3.0, 4.0]).unwrap()).unwrap();
        let set = sensitivity_in_set_test(&s, &[0.0], 0.1, 1e-3, 16, 10_000).unwrap();
        let point = strong_sensitivity_test(&s, 0.0, 0.1, 1e-3, 16, 10_000).unwrap();
        assert_eq!(set.verdict, point.verdict);
        assert_eq!(set.reports[0], point);
    }

    #[test]
    fn chaotic_logistic_on_a_set() {
        let s = logistic(ParamSequence::constant(4.0).unwrap()).unwrap();
        let r = sensitivity_in_set_test(&s, &[0.0, 0.13, 0.77], 0.05, 1e-3, 16, 10_000).unwrap();
        assert_eq!(r.verdict, Verdict::StronglySensitive);
        let a = affine_constant(0.5, 0.0).unwrap();
        let r = sensitivity_in_set_test(&a, &[0.1, 0.5, 0.9], 0.05, 1e-3, 16, 1000).unwrap();
        assert_eq!(r.verdict, Verdict::NotDetected);
    }

    #[test]
    fn shift_replay_is_bitwise() {
        let s = logistic(ParamSequence::periodic(vec![2.0, 3.0, 4.0]).unwrap()).unwrap();
        let r = strong_sensitivity_test(&s, 0.0, 0.1, 1e-3, 16, 10_000).unwrap();
        for k in [1, 2, 5] {
            let rep = shift_sensitivity_check(&s, k, &r).unwrap();
            assert!(rep.pass && rep.bitwise_equal);
            assert!(rep.probes_checked > 0);
        }
        let n_min = r.probes.iter().filter_map(|p| p.escape_time).min().unwrap();
        let rep = shift_sensitivity_check(&s, n_min - 1, &r).unwrap();
        assert!(rep.pass);
        assert!(matches!(
            shift_sensitivity_check(&s, 10_000, &r),
            Err(LabError::Precondition(_))
        ));
    }
}
