//! `nads-lab`: command-line front end for `nads-core`.
//!
//! Each command reads a system file (see [`spec`]), runs one analysis and
//! writes CSV series and JSON reports into `--out`. Exit status: 0 for a
//! definite result, 2 when the result is undetermined, 1 on errors.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nads_core::hypotheses::{
    check_theorem, derivative_modulus, CheckStatus, HypothesisConfig, HypothesisReport, Theorem, TheoremTarget,
};
use nads_core::lyapunov::{exponents_at, ExponentEstimate};
use nads_core::sensitivity::{
    default_delta, delta_scan, probe_separation, sensitivity_in_set_test, strong_sensitivity_test, SensitivityReport,
    Verdict,
};
use nads_core::stability::{certify, envelope_series, Certification, DEFAULT_C0_HORIZON};
use nads_core::systems::logistic;
use nads_core::{iterate_orbit, Interval, LabError, MapSequence, ParamSequence};
use serde::Serialize;

pub mod output;
pub mod spec;

use output::{fmt_f64, write_csv, write_json};
use spec::SystemSpec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// How a successful run ended, with a one-line summary for the terminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub undetermined: bool,
    pub summary: String,
}

impl Outcome {
    fn new(undetermined: bool, summary: String) -> Self {
        Self { undetermined, summary }
    }

    pub fn exit_code(&self) -> u8 {
        if self.undetermined {
            2
        } else {
            0
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nads-lab",
    version,
    about = "Orbits, Lyapunov exponents, sensitivity and stability of x_{n+1} = f_n(x_n)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// System file (TOML).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Replaces the seed of seeded-uniform parameters.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SystemArgs {
    fn load(&self) -> Result<MapSequence, CliError> {
        let mut spec = SystemSpec::load(&self.spec)?;
        if let Some(seed) = self.seed {
            spec = spec.with_seed(seed);
        }
        spec.build()
    }

    fn horizon(&self) -> usize {
        self.horizon as usize
    }
}

fn tail_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive number"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    PointSensitivity,
    SetSensitivity,
    ExponentialStability,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes orbit.csv: n, x_n, S_n.
    Orbit {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
    },
    /// Writes exponents.csv (n, S_n / n) and exponents.json.
    Lyapunov {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, default_value_t = 0.5, value_parser = tail_fraction)]
        tail_fraction: f64,
    },
    /// Strong-sensitivity probe; writes sensitivity.json and separations.csv.
    Sensitivity {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "points")]
        x0: Option<f64>,
        /// Tests every listed point with one shared delta instead of `--x0`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "x0")]
        points: Option<Vec<f64>>,
        /// Candidate sensitivity constant; defaults to a twentieth of the domain width.
        #[arg(long, value_parser = positive)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1e-3, value_parser = positive)]
        radius: f64,
        #[arg(long, default_value_t = 16)]
        probes: usize,
        /// Also reports verdicts for delta = width * 2^-j, j = 1..=LEVELS.
        #[arg(long, value_name = "LEVELS")]
        delta_scan: Option<u32>,
    },
    /// Builds and verifies a stability certificate; writes certificate.json and envelope.csv.
    Stability {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, default_value_t = 0.01, value_parser = positive)]
        eta: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0.5, value_parser = tail_fraction)]
        tail_fraction: f64,
        /// Horizon for the exponent estimates; defaults to `--horizon`.
        #[arg(long)]
        exponent_horizon: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_C0_HORIZON)]
        c0_horizon: usize,
    },
    /// Checks the hypotheses of a theorem; writes hypotheses.json and modulus.csv.
    Hypotheses {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        #[arg(long, allow_negative_numbers = true, required_if_eq_any = [("theorem", "point-sensitivity"), ("theorem", "exponential-stability")])]
        x0: Option<f64>,
        /// Invariant subinterval for set-sensitivity.
        #[arg(long, allow_negative_numbers = true, required_if_eq("theorem", "set-sensitivity"))]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true, required_if_eq("theorem", "set-sensitivity"))]
        hi: Option<f64>,
        /// Sample points of the subinterval for set-sensitivity.
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            required_if_eq("theorem", "set-sensitivity")
        )]
        points: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.1, 0.01])]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 0.5, value_parser = tail_fraction)]
        tail_fraction: f64,
    },
    /// Runs the expanding and contracting reference scenarios of the
    /// periodic and random logistic systems; writes paper_repro.json and envelope.csv.
    #[command(name = "reproduce-paper")]
    Reproduce {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Orbit { system, x0 } => run_orbit(&system, x0),
        Command::Lyapunov {
            system,
            x0,
            tail_fraction,
        } => run_lyapunov(&system, x0, tail_fraction),
        Command::Sensitivity {
            system,
            x0,
            points,
            delta,
            radius,
            probes,
            delta_scan,
        } => run_sensitivity(&system, x0, points, delta, radius, probes, delta_scan),
        Command::Stability {
            system,
            x0,
            eta,
            samples,
            tail_fraction,
            exponent_horizon,
            c0_horizon,
        } => {
            let seq = system.load()?;
            let exponents = exponents_at(&seq, x0, exponent_horizon.unwrap_or(system.horizon()), tail_fraction)?;
            let result = certify(&seq, x0, eta, &exponents, c0_horizon, samples, system.horizon())?;
            write_stability(&system.out, &seq, x0, &exponents, &result, system.horizon())?;
            Ok(stability_outcome(&result))
        }
        Command::Hypotheses {
            system,
            theorem,
            x0,
            lo,
            hi,
            points,
            epsilons,
            tail_fraction,
        } => {
            let seq = system.load()?;
            let config = HypothesisConfig {
                epsilons,
                ..HypothesisConfig::default()
            };
            let (theorem, target, on) = match theorem {
                TheoremArg::PointSensitivity | TheoremArg::ExponentialStability => {
                    let x0 = x0.expect("required by clap");
                    let exponents = exponents_at(&seq, x0, system.horizon(), tail_fraction)?;
                    let t = if theorem == TheoremArg::PointSensitivity {
                        Theorem::PointSensitivity
                    } else {
                        Theorem::ExponentialStability
                    };
                    (t, TheoremTarget::Point { x0, exponents }, *seq.domain())
                }
                TheoremArg::SetSensitivity => {
                    let sub = Interval::new(lo.expect("required"), hi.expect("required"))?;
                    let samples = points
                        .expect("required")
                        .into_iter()
                        .map(|x| exponents_at(&seq, x, system.horizon(), tail_fraction).map(|e| (x, e)))
                        .collect::<Result<Vec<_>, _>>()?;
                    (
                        Theorem::SetSensitivity,
                        TheoremTarget::Set {
                            subinterval: sub,
                            samples,
                        },
                        sub,
                    )
                }
            };
            let report = check_theorem(&seq, theorem, &target, &config)?;
            write_hypotheses(&system.out, &seq, &report, &on, &config)?;
            Ok(Outcome::new(
                report.overall == CheckStatus::Sampled,
                format!("{theorem:?}: {:?}", report.overall),
            ))
        }
        Command::Reproduce { out, seed } => reproduce(&out, seed),
    }
}

fn run_orbit(system: &SystemArgs, x0: f64) -> Result<Outcome, CliError> {
    let seq = system.load()?;
    let orbit = iterate_orbit(&seq, x0, system.horizon())?;
    let rows = orbit
        .points()
        .iter()
        .enumerate()
        .map(|(n, x)| vec![n.to_string(), fmt_f64(*x), fmt_f64(orbit.partial_sum(n))]);
    write_csv(&system.out.join("orbit.csv"), &["n", "x_n", "S_n"], rows)?;
    Ok(Outcome::new(
        false,
        format!("orbit: {} steps from x0 = {x0}", system.horizon()),
    ))
}

#[derive(Serialize)]
struct ExponentSummary<'a> {
    system: &'a MapSequence,
    x0: f64,
    tail_fraction: f64,
    #[serde(flatten)]
    estimate: &'a ExponentEstimate,
}

fn run_lyapunov(system: &SystemArgs, x0: f64, tail_fraction: f64) -> Result<Outcome, CliError> {
    let seq = system.load()?;
    let estimate = exponents_at(&seq, x0, system.horizon(), tail_fraction)?;
    let rows = estimate
        .finite_time_series
        .iter()
        .enumerate()
        .map(|(i, v)| vec![(i + 1).to_string(), fmt_f64(*v)]);
    write_csv(&system.out.join("exponents.csv"), &["n", "finite_time_exponent"], rows)?;
    write_json(
        &system.out.join("exponents.json"),
        "exponents",
        ExponentSummary {
            system: &seq,
            x0,
            tail_fraction,
            estimate: &estimate,
        },
    )?;
    Ok(Outcome::new(
        false,
        format!(
            "upper = {}, lower = {}, converged = {}",
            estimate.upper, estimate.lower, estimate.converged
        ),
    ))
}

#[derive(Serialize)]
struct ScanRow {
    delta: f64,
    verdict: Verdict,
}

#[derive(Serialize)]
struct SensitivityDoc<'a, R: Serialize> {
    system: &'a MapSequence,
    probe_count: usize,
    #[serde(flatten)]
    report: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_scan: Option<Vec<ScanRow>>,
}

fn verdict_outcome(v: Verdict) -> Outcome {
    Outcome::new(v == Verdict::Undetermined, format!("{v:?}"))
}

fn stability_outcome(result: &Certification) -> Outcome {
    match result {
        Certification::Certified { verification, .. } => Outcome::new(
            false,
            format!(
                "certified: relative margin = {}, {} samples",
                verification.relative_margin, verification.samples_checked
            ),
        ),
        Certification::Indeterminate { .. } => Outcome::new(true, "indeterminate".into()),
    }
}

fn separations_csv(path: &Path, seq: &MapSequence, report: &SensitivityReport) -> Result<(), CliError> {
    let columns: Vec<Vec<f64>> = report
        .probes
        .iter()
        .map(|p| {
            if p.separations.is_empty() {
                probe_separation(seq, report.x0, p.y0, report.horizon)
            } else {
                Ok(p.separations.clone())
            }
        })
        .collect::<Result<_, _>>()?;
    let names: Vec<String> = (0..columns.len()).map(|j| format!("probe_{j}")).collect();
    let mut header = vec!["n"];
    header.extend(names.iter().map(String::as_str));
    let rows = (0..=report.horizon).map(|n| {
        std::iter::once(n.to_string())
            .chain(columns.iter().map(move |c| fmt_f64(c[n])))
            .collect::<Vec<_>>()
    });
    write_csv(path, &header, rows)
}

fn run_sensitivity(
    system: &SystemArgs,
    x0: Option<f64>,
    points: Option<Vec<f64>>,
    delta: Option<f64>,
    radius: f64,
    probes: usize,
    scan: Option<u32>,
) -> Result<Outcome, CliError> {
    let seq = system.load()?;
    let delta = delta.unwrap_or_else(|| default_delta(&seq));
    let horizon = system.horizon();
    let path = system.out.join("sensitivity.json");
    let verdict = if let Some(points) = points {
        let report = sensitivity_in_set_test(&seq, &points, delta, radius, probes, horizon)?;
        let verdict = report.verdict;
        write_json(
            &path,
            "set_sensitivity",
            SensitivityDoc {
                system: &seq,
                probe_count: probes,
                report,
                delta_scan: None,
            },
        )?;
        verdict
    } else {
        let x0 = x0.expect("required by clap");
        let report = strong_sensitivity_test(&seq, x0, delta, radius, probes, horizon)?;
        let delta_scan = scan
            .map(|levels| delta_scan(&seq, x0, radius, probes, horizon, levels))
            .transpose()?
            .map(|rows| {
                rows.into_iter()
                    .map(|(delta, verdict)| ScanRow { delta, verdict })
                    .collect()
            });
        separations_csv(&system.out.join("separations.csv"), &seq, &report)?;
        let verdict = report.verdict;
        write_json(
            &path,
            "sensitivity",
            SensitivityDoc {
                system: &seq,
                probe_count: probes,
                report,
                delta_scan,
            },
        )?;
        verdict
    };
    Ok(verdict_outcome(verdict))
}

#[derive(Serialize)]
struct StabilityDoc<'a> {
    system: &'a MapSequence,
    exponents: &'a ExponentEstimate,
    #[serde(flatten)]
    result: &'a Certification,
}

/// Writes certificate.json and the worst sample's envelope.csv.
fn write_stability(
    out: &Path,
    seq: &MapSequence,
    x0: f64,
    exponents: &ExponentEstimate,
    result: &Certification,
    horizon: usize,
) -> Result<(), CliError> {
    write_json(
        &out.join("certificate.json"),
        "certificate",
        StabilityDoc {
            system: seq,
            exponents,
            result,
        },
    )?;
    let (cert, verification) = match result {
        Certification::Certified {
            certificate,
            verification,
            ..
        } => (certificate, verification),
        Certification::Indeterminate { attempts } => {
            let (c, v) = attempts.last().expect("certify records every attempt");
            (c, v)
        }
    };
    let series = envelope_series(seq, x0, verification.worst_y0, cert, horizon)?;
    let rows = series
        .into_iter()
        .map(|(n, sep, bound)| vec![n.to_string(), fmt_f64(sep), fmt_f64(bound)]);
    write_csv(&out.join("envelope.csv"), &["n", "sep", "bound"], rows)?;
    Ok(())
}

#[derive(Serialize)]
struct HypothesesDoc<'a> {
    system: &'a MapSequence,
    #[serde(flatten)]
    report: &'a HypothesisReport,
}

fn write_hypotheses(
    out: &Path,
    seq: &MapSequence,
    report: &HypothesisReport,
    on: &Interval,
    config: &HypothesisConfig,
) -> Result<(), CliError> {
    write_json(
        &out.join("hypotheses.json"),
        "hypotheses",
        HypothesesDoc { system: seq, report },
    )?;
    let restricted = MapSequence::new(*on, seq.family().clone(), seq.smoothness());
    // the subinterval need not be invariant; fall back to the full domain
    let target = restricted.as_ref().unwrap_or(seq);
    let spacing = seq.domain().width() / config.grid_points as f64;
    let modulus = derivative_modulus(target, &config.epsilons, spacing, config.index_horizon)?;
    let rows = modulus.table.iter().map(|r| vec![fmt_f64(r.epsilon), fmt_f64(r.delta)]);
    write_csv(&out.join("modulus.csv"), &["epsilon", "delta"], rows)
}

#[derive(Serialize)]
struct SensitiveRegime {
    system: MapSequence,
    x0: f64,
    probe_count: usize,
    lambda_upper: f64,
    lambda_lower: f64,
    lambda_closed_form: f64,
    hypotheses: CheckStatus,
    sensitivity: SensitivityReport,
}

#[derive(Serialize)]
struct StableRegime {
    system: MapSequence,
    x0: f64,
    exponents: ExponentEstimate,
    hypotheses: CheckStatus,
    result: Certification,
}

#[derive(Serialize)]
struct Reproduction {
    sensitive_verdict: Verdict,
    stable_verdict: &'static str,
    sensitive: SensitiveRegime,
    stable: StableRegime,
}

pub const SENSITIVE_PARAMS: [f64; 3] = [2.0, 3.0, 4.0];
pub const STABLE_RANGE: (f64, f64) = (0.5, 0.7);

/// Expanding regime: periodic `r_n` in {2, 3, 4}; contracting regime:
/// seeded uniform `r_n` in [0.5, 0.7]. Both at the fixed point 0.
pub fn reproduce(out: &Path, seed: u64) -> Result<Outcome, CliError> {
    let x0 = 0.0;
    let config = HypothesisConfig::default();

    let seq = logistic(ParamSequence::periodic(SENSITIVE_PARAMS.to_vec())?)?;
    let exponents = exponents_at(&seq, x0, 10_000, 0.5)?;
    let point_check = check_theorem(
        &seq,
        Theorem::PointSensitivity,
        &TheoremTarget::Point {
            x0,
            exponents: exponents.clone(),
        },
        &config,
    )?;
    let sensitivity = strong_sensitivity_test(&seq, x0, 0.1, 1e-3, 16, 10_000)?;
    let closed = SENSITIVE_PARAMS.iter().map(|r| r.ln()).sum::<f64>() / 3.0;
    let sensitive = SensitiveRegime {
        system: seq,
        x0,
        probe_count: 16,
        lambda_upper: exponents.upper,
        lambda_lower: exponents.lower,
        lambda_closed_form: closed,
        hypotheses: point_check.overall,
        sensitivity,
    };

    let seq = logistic(ParamSequence::seeded_uniform(STABLE_RANGE.0, STABLE_RANGE.1, seed)?)?;
    let exponents = exponents_at(&seq, x0, 1000, 0.5)?;
    let stability_check = check_theorem(
        &seq,
        Theorem::ExponentialStability,
        &TheoremTarget::Point {
            x0,
            exponents: exponents.clone(),
        },
        &config,
    )?;
    let result = certify(&seq, x0, 0.01, &exponents, DEFAULT_C0_HORIZON, 1000, 1000)?;
    write_stability(out, &seq, x0, &exponents, &result, 1000)?;
    let stable_verdict = match result {
        Certification::Certified { .. } => "certified",
        Certification::Indeterminate { .. } => "indeterminate",
    };
    let stable = StableRegime {
        system: seq,
        x0,
        exponents,
        hypotheses: stability_check.overall,
        result,
    };
    let definite = sensitive.sensitivity.verdict != Verdict::Undetermined && stable_verdict == "certified";
    let summary = Reproduction {
        sensitive_verdict: sensitive.sensitivity.verdict,
        stable_verdict,
        sensitive,
        stable,
    };
    write_json(&out.join("paper_repro.json"), "reproduction", &summary)?;
    Ok(Outcome::new(
        !definite,
        format!("sensitive: {:?}, stable: {stable_verdict}", summary.sensitive_verdict),
    ))
}
