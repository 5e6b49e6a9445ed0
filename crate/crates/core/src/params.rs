//! Deterministic, randomly accessible parameter sequences `{p_n}`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Name and version of the counter-based generator behind
/// [`ParamKind::SeededUniform`]. Changing the draw rule requires a new tag.
pub const SEEDED_UNIFORM_GENERATOR: &str = "splitmix64-v1";

const SPLITMIX_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The rule producing `p_n` from the step index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamKind {
    Constant {
        c: f64,
    },
    Periodic {
        list: Vec<f64>,
    },
    /// Independent uniform draws on `[lo, hi]`, element `n` of the
    /// SplitMix64 stream seeded with `seed`.
    SeededUniform {
        lo: f64,
        hi: f64,
        seed: u64,
    },
    /// `v1` on index blocks of length 1, 4, 16, ... and `v2` on the interleaved
    /// blocks of length 2, 8, 32, ...; block `j` covers `[2^j - 1, 2^{j+1} - 1)`.
    BlockDoubling {
        v1: f64,
        v2: f64,
    },
    /// `list[n]` for `n < list.len()`, then `tail` forever.
    Explicit {
        list: Vec<f64>,
        tail: f64,
    },
}

/// A parameter rule together with an index offset (`value(n) = rule(n + offset)`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSequence {
    #[serde(flatten)]
    kind: ParamKind,
    offset: u64,
}

impl ParamSequence {
    pub fn new(kind: ParamKind) -> Result<Self> {
        validate(&kind)?;
        Ok(Self { kind, offset: 0 })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(ParamKind::Constant { c })
    }

    pub fn periodic(list: Vec<f64>) -> Result<Self> {
        Self::new(ParamKind::Periodic { list })
    }

    pub fn seeded_uniform(lo: f64, hi: f64, seed: u64) -> Result<Self> {
        Self::new(ParamKind::SeededUniform { lo, hi, seed })
    }

    pub fn block_doubling(v1: f64, v2: f64) -> Result<Self> {
        Self::new(ParamKind::BlockDoubling { v1, v2 })
    }

    pub fn explicit(list: Vec<f64>, tail: f64) -> Result<Self> {
        Self::new(ParamKind::Explicit { list, tail })
    }

    pub fn kind(&self) -> &ParamKind {
        &self.kind
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// `p_n`; O(1) for every kind.
    pub fn value(&self, n: u64) -> f64 {
        let m = n.wrapping_add(self.offset);
        match &self.kind {
            ParamKind::Constant { c } => *c,
            ParamKind::Periodic { list } => list[(m % list.len() as u64) as usize],
            ParamKind::SeededUniform { lo, hi, seed } => {
                let u = uniform_draw(*seed, m);
                (lo + (hi - lo) * u).min(*hi)
            }
            ParamKind::BlockDoubling { v1, v2 } => {
                if block_index(m).is_multiple_of(2) {
                    *v1
                } else {
                    *v2
                }
            }
            ParamKind::Explicit { list, tail } => match usize::try_from(m) {
                Ok(i) if i < list.len() => list[i],
                _ => *tail,
            },
        }
    }

    /// The sequence `n -> p_{n+k}`.
    pub fn shifted(&self, k: u64) -> Self {
        Self {
            kind: self.kind.clone(),
            offset: self.offset.wrapping_add(k),
        }
    }

    /// Exact period for constant and periodic rules.
    pub fn period(&self) -> Option<u64> {
        match &self.kind {
            ParamKind::Constant { .. } => Some(1),
            ParamKind::Periodic { list } => Some(list.len() as u64),
            _ => None,
        }
    }

    /// Infimum and supremum of `p_n` over all `n >= 0`. For seeded draws these
    /// are the support endpoints.
    pub fn bounds(&self) -> (f64, f64) {
        let fold = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        match &self.kind {
            ParamKind::Constant { c } => (*c, *c),
            ParamKind::Periodic { list } => fold(&mut list.iter().copied()),
            ParamKind::SeededUniform { lo, hi, .. } => (*lo, *hi),
            ParamKind::BlockDoubling { v1, v2 } => (v1.min(*v2), v1.max(*v2)),
            ParamKind::Explicit { list, tail } => {
                let skip = usize::try_from(self.offset).unwrap_or(usize::MAX);
                fold(&mut list.iter().skip(skip).copied().chain([*tail]))
            }
        }
    }
}

fn validate(kind: &ParamKind) -> Result<()> {
    let finite = |v: f64, what: &str| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(LabError::Config(format!("{what} must be finite, got {v}")))
        }
    };
    match kind {
        ParamKind::Constant { c } => finite(*c, "c"),
        ParamKind::Periodic { list } => {
            if list.is_empty() {
                return Err(LabError::Config("periodic list must be nonempty".into()));
            }
            list.iter().try_for_each(|v| finite(*v, "list entry"))
        }
        ParamKind::SeededUniform { lo, hi, .. } => {
            finite(*lo, "lo")?;
            finite(*hi, "hi")?;
            if lo > hi {
                return Err(LabError::Config(format!(
                    "seeded_uniform needs lo <= hi, got [{lo}, {hi}]"
                )));
            }
            Ok(())
        }
        ParamKind::BlockDoubling { v1, v2 } => {
            finite(*v1, "v1")?;
            finite(*v2, "v2")
        }
        ParamKind::Explicit { list, tail } => {
            finite(*tail, "tail")?;
            list.iter().try_for_each(|v| finite(*v, "list entry"))
        }
    }
}

/// `floor(log2(m + 1))`, saturating at the top index.
fn block_index(m: u64) -> u32 {
    match m.checked_add(1) {
        Some(v) => 63 - v.leading_zeros(),
        None => 64,
    }
}

/// Element `m` of the SplitMix64 stream for `seed`, mapped to `[0, 1)` with 53 bits.
fn uniform_draw(seed: u64, m: u64) -> f64 {
    let state = seed.wrapping_add(m.wrapping_mul(SPLITMIX_GAMMA));
    let bits = SplitMix64::from_seed(state.to_le_bytes()).next_u64();
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    #[test]
    fn periodic_wraps() {
        let p = ParamSequence::periodic(vec![2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.value(5), 4.0);
        assert_eq!(p.value(0), 2.0);
    }

    #[test]
    fn constant_everywhere() {
        let p = ParamSequence::constant(0.7).unwrap();
        assert_eq!(p.value(1_000_000), 0.7);
    }

    #[test]
    fn block_doubling_schedule() {
        // Hand-run schedule: {0} -> v1, {1,2} -> v2, {3..6} -> v1, {7..14} -> v2, {15..30} -> v1.
        let p = ParamSequence::block_doubling(2.0, 4.0).unwrap();
        let expected: Vec<f64> = (0..=16u64)
            .map(|n| match n {
                0 => 2.0,
                1..=2 => 4.0,
                3..=6 => 2.0,
                7..=14 => 4.0,
                _ => 2.0,
            })
            .collect();
        let got: Vec<f64> = (0..=16).map(|n| p.value(n)).collect();
        assert_eq!(got, expected);
        assert_eq!(p.shifted(1).value(0), 4.0);
    }

    #[test]
    fn periodic_shift_reads_rotated() {
        let p = ParamSequence::periodic(vec![2.0, 3.0]).unwrap().shifted(1);
        let got: Vec<f64> = (0..4).map(|n| p.value(n)).collect();
        assert_eq!(got, vec![3.0, 2.0, 3.0, 2.0]);
    }

    #[test]
    fn explicit_continues_with_tail() {
        let p = ParamSequence::explicit(vec![1.0, 2.0], 9.0).unwrap();
        assert_eq!(
            (p.value(0), p.value(1), p.value(2), p.value(1 << 40)),
            (1.0, 2.0, 9.0, 9.0)
        );
        assert_eq!(p.bounds(), (1.0, 9.0));
        assert_eq!(p.shifted(1).bounds(), (2.0, 9.0));
    }

    #[test]
    fn seeded_uniform_is_reproducible_and_frozen() {
        let p = ParamSequence::seeded_uniform(0.5, 0.7, 42).unwrap();
        let q = ParamSequence::seeded_uniform(0.5, 0.7, 42).unwrap();
        for n in [0u64, 1, 17, 1 << 20, u64::MAX - 1] {
            assert_eq!(p.value(n).to_bits(), q.value(n).to_bits());
        }
        let other = ParamSequence::seeded_uniform(0.5, 0.7, 43).unwrap();
        assert_ne!(p.value(0), other.value(0));
        // element 0 of the SplitMix64 stream for seed 0 is the published 0xe220a8397b1dcdaf
        let bits = SplitMix64::from_seed(0u64.to_le_bytes()).next_u64();
        assert_eq!(bits, 0xe220_a839_7b1d_cdaf);
        assert_eq!(
            uniform_draw(0, 0),
            (0xe220_a839_7b1d_cdafu64 >> 11) as f64 / (1u64 << 53) as f64
        );
    }

    #[test]
    fn rejects_bad_kinds() {
        assert!(ParamSequence::periodic(vec![]).is_err());
        assert!(ParamSequence::seeded_uniform(1.0, 0.0, 1).is_err());
        assert!(ParamSequence::constant(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn seeded_uniform_stays_in_range(lo in -5.0f64..5.0, w in 0.0f64..3.0, seed: u64, n: u64) {
            let p = ParamSequence::seeded_uniform(lo, lo + w, seed).unwrap();
            let v = p.value(n);
            prop_assert!(lo <= v && v <= lo + w);
        }

        #[test]
        fn shift_composes(k1 in 0u64..1000, k2 in 0u64..1000, n in 0u64..10_000, seed: u64) {
            for p in [
                ParamSequence::seeded_uniform(0.5, 0.7, seed).unwrap(),
                ParamSequence::block_doubling(2.0, 4.0).unwrap(),
                ParamSequence::periodic(vec![1.0, 2.0, 3.5]).unwrap(),
                ParamSequence::explicit(vec![0.1, 0.2, 0.3], 0.4).unwrap(),
            ] {
                prop_assert_eq!(p.shifted(k1).shifted(k2).value(n).to_bits(), p.value(n + k1 + k2).to_bits());
            }
        }
    }
}
