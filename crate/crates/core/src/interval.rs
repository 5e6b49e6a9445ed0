use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Non-degenerate closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(LabError::Config(format!(
                "interval [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(LabError::Domain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `points + 1` equally spaced nodes from `lo` to `hi`, both endpoints exact.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let points = points.max(1);
        let step = self.width() / points as f64;
        (0..=points)
            .map(|i| {
                if i == points {
                    self.hi
                } else {
                    self.lo + i as f64 * step
                }
            })
            .collect()
    }

    /// Number of grid cells needed for a spacing of at most `spacing`.
    pub fn cells_for_spacing(&self, spacing: f64) -> Result<usize> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(LabError::Config(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        Ok(((self.width() / spacing).ceil() as usize).max(1))
    }
}
