//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nads_core::lyapunov::{exponents_at, shift_exponent_check};
use nads_core::orbit::separations;
use nads_core::sensitivity::{shift_sensitivity_check, strong_sensitivity_test, Verdict};
use nads_core::stability::{
    build_certificate, compute_c0, discrete_gronwall_bound, fit_envelope, lyapunov_stability_test, verify_envelope,
};
use nads_core::systems::{affine, affine_constant, logistic};
use nads_core::{iterate_orbit, Interval, LabError, MapSequence, ParamSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn periodic234() -> MapSequence {
    logistic(ParamSequence::periodic(vec![2.0, 3.0, 4.0]).unwrap()).unwrap()
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn sensitive_regime() -> Outcome {
    let start = Instant::now();
    let seq = periodic234();
    let est = exponents_at(&seq, 0.0, 10_000, 0.5).map_err(e2s)?;
    let report = strong_sensitivity_test(&seq, 0.0, 0.1, 1e-3, 16, 10_000).map_err(e2s)?;
    let elapsed = start.elapsed();
    let exact = (2f64.ln() + 3f64.ln() + 4f64.ln()) / 3.0;
    ensure((est.upper - exact).abs() <= 1e-12, || {
        format!("upper {} vs {exact}", est.upper)
    })?;
    ensure(report.verdict == Verdict::StronglySensitive, || {
        format!("verdict {:?}", report.verdict)
    })?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "lambda(0) = {:.15}, {:?}, {elapsed:.2?}",
        est.upper, report.verdict
    ))
}

fn stable_regime() -> Outcome {
    let start = Instant::now();
    let seq = logistic(ParamSequence::seeded_uniform(0.5, 0.7, 1).unwrap()).map_err(e2s)?;
    let est = exponents_at(&seq, 0.0, 1000, 0.5).map_err(e2s)?;
    ensure(2.0 * est.upper < est.lower, || {
        format!("gate: 2 * {} >= {}", est.upper, est.lower)
    })?;
    let cert = build_certificate(&seq, 0.0, 0.01, &est, 1000).map_err(e2s)?;
    let v = verify_envelope(&seq, 0.0, &cert, 1000, 1000).map_err(e2s)?;
    let elapsed = start.elapsed();
    ensure(v.samples_checked == 1000, || format!("{} samples", v.samples_checked))?;
    ensure(v.pass && v.margin > 0.0, || format!("margin {}", v.margin))?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!(
        "delta = {:.3e}, margin = {:.3e}, relative margin = {:.3}, {elapsed:.2?}",
        cert.delta, v.margin, v.relative_margin
    ))
}

fn gronwall() -> Outcome {
    let slack = 1.0 + 4.0 * f64::EPSILON;
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: f64 = rng.random_range(0.0..10.0);
        let mu: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..0.5)).collect();
        let bound = discrete_gronwall_bound(b, &mu, 64).map_err(e2s)?;
        let mut z = vec![b];
        for n in 1..=64 {
            let s: f64 = (1..=n).map(|k| mu[k - 1] * z[k - 1]).sum();
            z.push(b + s);
        }
        for n in 0..=64 {
            ensure(z[n] <= bound[n] * slack, || {
                format!("seed {seed}, n {n}: {} > {}", z[n], bound[n])
            })?;
        }
    }
    let ones = discrete_gronwall_bound(1.0, &[1.0; 40], 40).map_err(e2s)?;
    for (n, b) in ones.iter().enumerate() {
        ensure(2f64.powi(n as i32) <= *b, || format!("2^{n} > {b}"))?;
    }
    Ok("500 instances, n <= 64; 2^n <= e^n for n <= 40".into())
}

fn block(n: usize) -> u64 {
    // r = 2 on even blocks [2^j - 1, 2^(j+1) - 1), r = 4 on odd ones; in units of ln 2
    let j = usize::BITS - 1 - (n + 1).leading_zeros();
    if j.is_multiple_of(2) {
        1
    } else {
        2
    }
}

fn limsup_liminf() -> Outcome {
    let horizon = 1 << 16;
    let seq = logistic(ParamSequence::block_doubling(2.0, 4.0).unwrap()).map_err(e2s)?;
    let est = exponents_at(&seq, 0.0, horizon, 0.5).map_err(e2s)?;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut units = 0u64;
    for n in 1..=horizon {
        units += block(n - 1);
        if n >= horizon / 2 {
            let mean = units as f64 * 2f64.ln() / n as f64;
            hi = hi.max(mean);
            lo = lo.min(mean);
        }
    }
    ensure((est.upper - hi).abs() <= 1e-12, || {
        format!("upper {} vs oracle {hi}", est.upper)
    })?;
    ensure((est.lower - lo).abs() <= 1e-12, || {
        format!("lower {} vs oracle {lo}", est.lower)
    })?;
    let gap = est.upper - est.lower;
    ensure(gap >= 0.2, || format!("gap {gap}"))?;
    Ok(format!("upper - lower = {gap:.6}"))
}

fn c0_brute(logs: &[f64], lambda: f64, rho: f64) -> f64 {
    let mut best = 1.0f64;
    for k in 0..=logs.len() {
        let mut s = 0.0;
        for n in k..=logs.len() {
            if n > k {
                s += logs[n - 1] - lambda;
            }
            best = best.max((s - k as f64 * rho).exp());
        }
    }
    best
}

fn c0_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + seed);
        let seq = if seed % 2 == 0 {
            let list: Vec<f64> = (0..rng.random_range(1..5))
                .map(|_| rng.random_range(0.3..3.9))
                .collect();
            logistic(ParamSequence::periodic(list).unwrap()).map_err(e2s)?
        } else {
            let slopes: Vec<f64> = (0..3)
                .map(|_| rng.random_range(-0.9..0.9))
                .filter(|s: &f64| s.abs() > 0.05)
                .collect();
            let slopes = if slopes.is_empty() { vec![0.5] } else { slopes };
            affine(
                ParamSequence::periodic(slopes).unwrap(),
                ParamSequence::constant(0.05).unwrap(),
                Interval::new(-1.0, 1.0).unwrap(),
            )
            .map_err(e2s)?
        };
        let x0 = rng.random_range(0.05..0.45);
        let horizon = rng.random_range(1..=512);
        let orbit = iterate_orbit(&seq, x0, horizon).map_err(e2s)?;
        let logs = orbit.log_derivs();
        let mean = logs.iter().sum::<f64>() / horizon as f64;
        let upper = mean + rng.random_range(0.0..0.3);
        let lower = upper - rng.random_range(0.0..0.3);
        let eps0 = rng.random_range(0.001..0.05);
        let fast = compute_c0(&orbit, upper + eps0, upper, lower, eps0, horizon).map_err(e2s)?;
        let slow = c0_brute(logs, upper + eps0, upper - lower + 2.0 * eps0);
        let rel = ((fast - slow) / slow).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("seed {seed}: {fast} vs {slow}"))?;
    }
    let seq = logistic(ParamSequence::constant(0.6).unwrap()).map_err(e2s)?;
    let est = exponents_at(&seq, 0.0, 1000, 0.5).map_err(e2s)?;
    let cert = build_certificate(&seq, 0.0, 0.01, &est, 1000).map_err(e2s)?;
    ensure(cert.c0 == 1.0, || format!("Constant(0.6): C0 = {}", cert.c0))?;
    Ok(format!(
        "50 instances, worst relative error {worst:.1e}; Constant(0.6) C0 = 1"
    ))
}

fn shifts() -> Outcome {
    let seq = periodic234();
    let report = strong_sensitivity_test(&seq, 0.0, 0.1, 1e-3, 16, 10_000).map_err(e2s)?;
    let mut checked = 0;
    for k in [1, 2, 5] {
        let replay = shift_sensitivity_check(&seq, k, &report).map_err(e2s)?;
        ensure(replay.pass && replay.bitwise_equal, || {
            format!("replay failed for k = {k}")
        })?;
        checked += replay.probes_checked;
    }
    let mut worst = 0.0f64;
    for k in [1, 2, 5] {
        let c = shift_exponent_check(&seq, 0.0, k, 10_000).map_err(e2s)?;
        worst = worst.max(c.discrepancy);
    }
    ensure(worst <= 2e-3, || format!("exponent discrepancy {worst}"))?;
    Ok(format!(
        "{checked} probe replays bitwise equal; exponent discrepancy {worst:.2e}"
    ))
}

fn contraction() -> Outcome {
    let seq = affine_constant(0.5, 0.0).map_err(e2s)?;
    let w = separations(&seq, 0.3, 0.31, 60).map_err(e2s)?;
    let fit = fit_envelope(&w).map_err(e2s)?;
    ensure((fit.lambda_fit - 2f64.ln()).abs() <= 1e-12, || {
        format!("lambda_fit {}", fit.lambda_fit)
    })?;
    ensure(fit.holds, || "fit does not hold".into())?;
    let eta = 0.01;
    let gaps: Vec<f64> = (0..10).map(|j| eta * 0.5f64.powi(j)).collect();
    let stable = lyapunov_stability_test(&seq, 0.3, eta, &gaps, 1000).map_err(e2s)?;
    ensure(stable.pass, || "Lyapunov stability test failed".into())?;

    let two = logistic(ParamSequence::constant(2.0).unwrap()).map_err(e2s)?;
    let est = exponents_at(&two, 0.0, 1000, 0.5).map_err(e2s)?;
    match build_certificate(&two, 0.0, 0.01, &est, 1000) {
        Err(LabError::Hypothesis(_)) => {}
        other => return Err(format!("Constant(2): expected a hypothesis error, got {other:?}")),
    }
    Ok(format!(
        "lambda_fit = {:.15}; gaps <= eta stable; Constant(2) rejected",
        fit.lambda_fit
    ))
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(e2s)?;
    let b = tempfile::tempdir().map_err(e2s)?;
    nads_cli::reproduce(a.path(), 1).map_err(e2s)?;
    nads_cli::reproduce(b.path(), 1).map_err(e2s)?;
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .map_err(e2s)?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()
        .map_err(e2s)?;
    names.sort();
    ensure(names.iter().any(|n| n == "paper_repro.json"), || {
        "paper_repro.json missing".into()
    })?;
    for name in &names {
        let x = std::fs::read(a.path().join(name)).map_err(e2s)?;
        let y = std::fs::read(b.path().join(name)).map_err(e2s)?;
        ensure(x == y, || format!("{} differs", name.to_string_lossy()))?;
    }
    let count = std::fs::read_dir(b.path()).map_err(e2s)?.count();
    ensure(count == names.len(), || "second run wrote a different file set".into())?;
    Ok(format!("{} files byte-identical", names.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("sensitive regime", sensitive_regime),
        ("stable regime", stable_regime),
        ("Gronwall oracle", gronwall),
        ("limsup != liminf", limsup_liminf),
        ("C0 oracle", c0_oracle),
        ("shift properties", shifts),
        ("contraction ground truth", contraction),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
