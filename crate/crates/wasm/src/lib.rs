//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every view is built by a plain Rust function (`*_view`) returning the
//! numbers the page plots; the `#[wasm_bindgen]` wrappers only translate
//! errors into JS exceptions.

use nads_core::lyapunov::exponents_at;
use nads_core::orbit::separations;
use nads_core::sensitivity::strong_sensitivity_test;
use nads_core::stability::{certify, Certification, DEFAULT_C0_HORIZON};
use nads_core::systems::logistic;
use nads_core::{LabError, MapSequence, ParamSequence, Verdict};
use wasm_bindgen::prelude::*;

/// Logistic system from a parameter kind name and its numbers:
/// `constant [c]`, `periodic [r0, r1, ...]`, `seeded_uniform [lo, hi]`,
/// `block_doubling [v1, v2]`.
pub fn logistic_system(kind: &str, values: &[f64], seed: u64) -> Result<MapSequence, LabError> {
    let need = |n: usize| {
        if values.len() == n {
            Ok(())
        } else {
            Err(LabError::Config(format!(
                "{kind} takes {n} values, got {}",
                values.len()
            )))
        }
    };
    let params = match kind {
        "constant" => {
            need(1)?;
            ParamSequence::constant(values[0])?
        }
        "periodic" => ParamSequence::periodic(values.to_vec())?,
        "seeded_uniform" => {
            need(2)?;
            ParamSequence::seeded_uniform(values[0], values[1], seed)?
        }
        "block_doubling" => {
            need(2)?;
            ParamSequence::block_doubling(values[0], values[1])?
        }
        other => return Err(LabError::Config(format!("unknown parameter kind `{other}`"))),
    };
    logistic(params)
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct ExponentView {
    series: Vec<f64>,
    upper: f64,
    lower: f64,
    tail_start: usize,
    converged: bool,
}

#[wasm_bindgen]
impl ExponentView {
    /// `S_n / n` for `n = 1..=N`.
    pub fn series(&self) -> Vec<f64> {
        self.series.clone()
    }
    pub fn upper(&self) -> f64 {
        self.upper
    }
    pub fn lower(&self) -> f64 {
        self.lower
    }
    pub fn tail_start(&self) -> usize {
        self.tail_start
    }
    pub fn converged(&self) -> bool {
        self.converged
    }
}

pub fn exponent_view(seq: &MapSequence, x0: f64, horizon: usize) -> Result<ExponentView, LabError> {
    let e = exponents_at(seq, x0, horizon, 0.5)?;
    Ok(ExponentView {
        upper: e.upper,
        lower: e.lower,
        tail_start: e.tail_start,
        converged: e.converged,
        series: e.finite_time_series,
    })
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct SensitivityView {
    verdict: String,
    starts: Vec<f64>,
    escapes: Vec<i64>,
    separations: Vec<Vec<f64>>,
}

#[wasm_bindgen]
impl SensitivityView {
    pub fn verdict(&self) -> String {
        self.verdict.clone()
    }
    pub fn probe_count(&self) -> usize {
        self.starts.len()
    }
    pub fn starts(&self) -> Vec<f64> {
        self.starts.clone()
    }
    /// Escape step per probe, `-1` when the probe never escaped.
    pub fn escapes(&self) -> Vec<i64> {
        self.escapes.clone()
    }
    pub fn separations(&self, probe: usize) -> Vec<f64> {
        self.separations.get(probe).cloned().unwrap_or_default()
    }
}

pub fn sensitivity_view(
    seq: &MapSequence,
    x0: f64,
    delta: f64,
    probes: usize,
    horizon: usize,
) -> Result<SensitivityView, LabError> {
    let r = strong_sensitivity_test(seq, x0, delta, 1e-3, probes, horizon)?;
    let verdict = match r.verdict {
        Verdict::StronglySensitive => "strongly sensitive",
        Verdict::NotDetected => "not detected",
        Verdict::Undetermined => "undetermined",
    };
    Ok(SensitivityView {
        verdict: verdict.into(),
        starts: r.probes.iter().map(|p| p.y0).collect(),
        escapes: r
            .probes
            .iter()
            .map(|p| p.escape_time.map_or(-1, |n| n as i64))
            .collect(),
        separations: r.probes.into_iter().map(|p| p.separations).collect(),
    })
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct CertificateView {
    certified: bool,
    delta: f64,
    lambda: f64,
    c0: f64,
    relative_margin: f64,
    worst_y0: f64,
    separations: Vec<f64>,
    bound: Vec<f64>,
}

#[wasm_bindgen]
impl CertificateView {
    pub fn certified(&self) -> bool {
        self.certified
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn relative_margin(&self) -> f64 {
        self.relative_margin
    }
    pub fn worst_y0(&self) -> f64 {
        self.worst_y0
    }
    /// `|w_n|` for the worst sample.
    pub fn separations(&self) -> Vec<f64> {
        self.separations.clone()
    }
    /// `eta exp(lambda n)`.
    pub fn bound(&self) -> Vec<f64> {
        self.bound.clone()
    }
}

pub fn certificate_view(
    seq: &MapSequence,
    x0: f64,
    eta: f64,
    samples: usize,
    horizon: usize,
) -> Result<CertificateView, LabError> {
    let e = exponents_at(seq, x0, horizon, 0.5)?;
    let (certified, cert, v) = match certify(seq, x0, eta, &e, DEFAULT_C0_HORIZON, samples, horizon)? {
        Certification::Certified {
            certificate,
            verification,
            ..
        } => (true, certificate, verification),
        Certification::Indeterminate { mut attempts } => {
            let (c, v) = attempts.pop().expect("at least one attempt");
            (false, c, v)
        }
    };
    Ok(CertificateView {
        certified,
        delta: cert.delta,
        lambda: cert.lambda,
        c0: cert.c0,
        relative_margin: v.relative_margin,
        worst_y0: v.worst_y0,
        separations: separations(seq, x0, v.worst_y0, horizon)?,
        bound: (0..=horizon).map(|n| cert.bound(n)).collect(),
    })
}

fn js(e: LabError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = exponentSeries)]
pub fn exponent_series(
    kind: &str,
    values: &[f64],
    seed: u64,
    x0: f64,
    horizon: usize,
) -> Result<ExponentView, JsError> {
    let seq = logistic_system(kind, values, seed).map_err(js)?;
    exponent_view(&seq, x0, horizon).map_err(js)
}

#[wasm_bindgen(js_name = probeSeparations)]
pub fn probe_separations(
    kind: &str,
    values: &[f64],
    seed: u64,
    x0: f64,
    delta: f64,
    probes: usize,
    horizon: usize,
) -> Result<SensitivityView, JsError> {
    let seq = logistic_system(kind, values, seed).map_err(js)?;
    sensitivity_view(&seq, x0, delta, probes, horizon).map_err(js)
}

#[wasm_bindgen(js_name = stabilityEnvelope)]
pub fn stability_envelope(
    kind: &str,
    values: &[f64],
    seed: u64,
    x0: f64,
    eta: f64,
    samples: usize,
    horizon: usize,
) -> Result<CertificateView, JsError> {
    let seq = logistic_system(kind, values, seed).map_err(js)?;
    certificate_view(&seq, x0, eta, samples, horizon).map_err(js)
}
