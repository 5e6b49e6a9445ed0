use crate::error::{LabError, Result};
use crate::maps::MapSequence;

/// A finite trajectory `x_0, ..., x_N` with its log-derivative sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    points: Vec<f64>,
    /// `ln|f_k'(x_k)|` for `k = 0..N`; `-inf` where the derivative vanishes.
    log_derivs: Vec<f64>,
    /// `S_n = sum_{k<n} ln|f_k'(x_k)|` for `n = 1..=N`, stored at index `n - 1`.
    partial_sums: Vec<f64>,
}

impl Orbit {
    pub fn x0(&self) -> f64 {
        self.points[0]
    }

    pub fn horizon(&self) -> usize {
        self.log_derivs.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn log_derivs(&self) -> &[f64] {
        &self.log_derivs
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    /// `S_n` with the convention `S_0 = 0`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.partial_sums[n - 1]
        }
    }

    /// First step whose derivative vanishes, if any.
    pub fn first_zero_derivative(&self) -> Option<usize> {
        self.log_derivs.iter().position(|l| *l == f64::NEG_INFINITY)
    }
}

/// Iterates `x_{n+1} = f_n(x_n)` for `horizon` steps.
///
/// A vanishing derivative contributes `ln 0 = -inf`, which is absorbing in
/// the partial sums.
pub fn iterate_orbit(seq: &MapSequence, x0: f64, horizon: usize) -> Result<Orbit> {
    seq.domain().check(x0)?;
    if horizon == 0 {
        return Err(LabError::Config("orbit horizon must be at least 1".into()));
    }
    let domain = *seq.domain();
    let mut points = Vec::with_capacity(horizon + 1);
    let mut log_derivs = Vec::with_capacity(horizon);
    let mut partial_sums = Vec::with_capacity(horizon);
    let mut x = x0;
    let mut sum = 0.0;
    points.push(x);
    for n in 0..horizon {
        let f = seq.step(n as u64);
        let l = f.deriv1(x).abs().ln();
        sum += l;
        log_derivs.push(l);
        partial_sums.push(sum);
        x = f.apply(x, &domain);
        points.push(x);
    }
    Ok(Orbit {
        points,
        log_derivs,
        partial_sums,
    })
}

/// Points only, without derivative bookkeeping.
pub fn trajectory(seq: &MapSequence, x0: f64, horizon: usize) -> Result<Vec<f64>> {
    seq.domain().check(x0)?;
    let domain = *seq.domain();
    let mut out = Vec::with_capacity(horizon + 1);
    let mut x = x0;
    out.push(x);
    for n in 0..horizon {
        x = seq.step(n as u64).apply(x, &domain);
        out.push(x);
    }
    Ok(out)
}

/// `|y_n - x_n|` for two orbits driven by the same maps, `n = 0..=horizon`.
pub fn separations(seq: &MapSequence, x0: f64, y0: f64, horizon: usize) -> Result<Vec<f64>> {
    seq.domain().check(x0)?;
    seq.domain().check(y0)?;
    let domain = *seq.domain();
    let (mut x, mut y) = (x0, y0);
    let mut out = Vec::with_capacity(horizon + 1);
    out.push((y - x).abs());
    for n in 0..horizon {
        let f = seq.step(n as u64);
        x = f.apply(x, &domain);
        y = f.apply(y, &domain);
        out.push((y - x).abs());
    }
    Ok(out)
}
