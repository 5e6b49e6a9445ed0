//! System specification files.
//!
//! A system file is TOML. `family` selects the map family, `[domain]` the
//! interval, and `[params]` the parameter sequence (logistic `r_n`, affine
//! slopes):
//!
//! ```toml
//! family = "logistic"
//!
//! [params]
//! kind = "periodic"
//! list = [2.0, 3.0, 4.0]
//! ```
//!
//! Parameter kinds and their keys:
//!
//! | kind             | keys              |
//! |------------------|-------------------|
//! | `constant`       | `c`               |
//! | `periodic`       | `list`            |
//! | `seeded_uniform` | `lo`, `hi`, `seed`|
//! | `block_doubling` | `v1`, `v2`        |
//! | `explicit`       | `list`, `tail`    |
//!
//! The affine family also takes an `[intercept]` table (default constant 0)
//! and `[domain]` (default `[0, 1]`). The polynomial family takes
//! `[[coefficients]]`, one parameter table per power starting at `x^0`, and
//! an optional `smoothness = "C1" | "C2"`. Unknown keys are rejected.

use std::path::Path;

use nads_core::systems::{affine, logistic, polynomial};
use nads_core::{Interval, MapSequence, ParamKind, ParamSequence, Smoothness};
use toml::{Table, Value};

use crate::CliError;

/// A parsed system file, before the map-level validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub family: FamilySpec,
    pub domain: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Logistic(ParamSequence),
    Affine {
        slopes: ParamSequence,
        intercepts: ParamSequence,
    },
    Polynomial {
        coefficients: Vec<ParamSequence>,
        smoothness: Smoothness,
    },
}

fn parse_err(key: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Parse {
        key: key.into(),
        message: message.into(),
    }
}

fn reject_unknown(table: &Table, prefix: &str, allowed: &[&str]) -> Result<(), CliError> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(parse_err(join(prefix, k), "unknown key")),
        None => Ok(()),
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn real(table: &Table, prefix: &str, key: &str) -> Result<f64, CliError> {
    match table.get(key) {
        Some(Value::Float(f)) => Ok(*f),
        Some(Value::Integer(i)) => Ok(*i as f64),
        Some(_) => Err(parse_err(join(prefix, key), "expected a number")),
        None => Err(parse_err(join(prefix, key), "missing")),
    }
}

fn reals(table: &Table, prefix: &str, key: &str) -> Result<Vec<f64>, CliError> {
    let full = join(prefix, key);
    let Some(value) = table.get(key) else {
        return Err(parse_err(full, "missing"));
    };
    let Value::Array(items) = value else {
        return Err(parse_err(full, "expected an array of numbers"));
    };
    items
        .iter()
        .map(|v| match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(parse_err(full.clone(), "expected an array of numbers")),
        })
        .collect()
}

fn sub_table<'a>(table: &'a Table, key: &str) -> Result<Option<&'a Table>, CliError> {
    match table.get(key) {
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(parse_err(key, "expected a table")),
        None => Ok(None),
    }
}

fn parse_params(table: &Table, prefix: &str) -> Result<ParamSequence, CliError> {
    let kind = match table.get("kind") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(parse_err(join(prefix, "kind"), "expected a string")),
        None => return Err(parse_err(join(prefix, "kind"), "missing")),
    };
    let kind = match kind {
        "constant" => {
            reject_unknown(table, prefix, &["kind", "c"])?;
            ParamKind::Constant {
                c: real(table, prefix, "c")?,
            }
        }
        "periodic" => {
            reject_unknown(table, prefix, &["kind", "list"])?;
            ParamKind::Periodic {
                list: reals(table, prefix, "list")?,
            }
        }
        "seeded_uniform" => {
            reject_unknown(table, prefix, &["kind", "lo", "hi", "seed"])?;
            let seed = match table.get("seed") {
                Some(Value::Integer(i)) if *i >= 0 => *i as u64,
                Some(_) => return Err(parse_err(join(prefix, "seed"), "expected a nonnegative integer")),
                None => return Err(parse_err(join(prefix, "seed"), "missing")),
            };
            ParamKind::SeededUniform {
                lo: real(table, prefix, "lo")?,
                hi: real(table, prefix, "hi")?,
                seed,
            }
        }
        "block_doubling" => {
            reject_unknown(table, prefix, &["kind", "v1", "v2"])?;
            ParamKind::BlockDoubling {
                v1: real(table, prefix, "v1")?,
                v2: real(table, prefix, "v2")?,
            }
        }
        "explicit" => {
            reject_unknown(table, prefix, &["kind", "list", "tail"])?;
            ParamKind::Explicit {
                list: reals(table, prefix, "list")?,
                tail: real(table, prefix, "tail")?,
            }
        }
        other => {
            return Err(parse_err(
                join(prefix, "kind"),
                format!("unknown parameter kind `{other}`"),
            ))
        }
    };
    ParamSequence::new(kind).map_err(|e| parse_err(prefix, e.to_string()))
}

impl SystemSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| parse_err("<file>", e.message().to_string()))?;
        let family = match table.get("family") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(parse_err("family", "expected a string")),
            None => return Err(parse_err("family", "missing")),
        };
        let domain = match sub_table(&table, "domain")? {
            Some(d) => {
                reject_unknown(d, "domain", &["lo", "hi"])?;
                let (lo, hi) = (real(d, "domain", "lo")?, real(d, "domain", "hi")?);
                Some(Interval::new(lo, hi).map_err(|e| parse_err("domain", e.to_string()))?)
            }
            None => None,
        };
        let params = |key: &str| -> Result<Option<ParamSequence>, CliError> {
            sub_table(&table, key)?.map(|t| parse_params(t, key)).transpose()
        };
        let required =
            |key: &str| -> Result<ParamSequence, CliError> { params(key)?.ok_or_else(|| parse_err(key, "missing")) };
        let family = match family.as_str() {
            "logistic" => {
                reject_unknown(&table, "", &["family", "domain", "params"])?;
                if domain.is_some_and(|d| d != Interval::unit()) {
                    return Err(parse_err("domain", "the logistic family lives on [0, 1]"));
                }
                FamilySpec::Logistic(required("params")?)
            }
            "affine" => {
                reject_unknown(&table, "", &["family", "domain", "params", "intercept"])?;
                FamilySpec::Affine {
                    slopes: required("params")?,
                    intercepts: match params("intercept")? {
                        Some(p) => p,
                        None => ParamSequence::constant(0.0).expect("finite constant"),
                    },
                }
            }
            "polynomial" => {
                reject_unknown(&table, "", &["family", "domain", "coefficients", "smoothness"])?;
                let items = match table.get("coefficients") {
                    Some(Value::Array(items)) if !items.is_empty() => items,
                    Some(_) => return Err(parse_err("coefficients", "expected a nonempty array of tables")),
                    None => return Err(parse_err("coefficients", "missing")),
                };
                let coefficients = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let key = format!("coefficients[{i}]");
                        match v {
                            Value::Table(t) => parse_params(t, &key),
                            _ => Err(parse_err(key, "expected a table")),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                let smoothness = match table.get("smoothness") {
                    None => Smoothness::C2,
                    Some(Value::String(s)) if s == "C2" => Smoothness::C2,
                    Some(Value::String(s)) if s == "C1" => Smoothness::C1,
                    Some(_) => return Err(parse_err("smoothness", "expected \"C1\" or \"C2\"")),
                };
                FamilySpec::Polynomial {
                    coefficients,
                    smoothness,
                }
            }
            other => return Err(parse_err("family", format!("unknown family `{other}`"))),
        };
        Ok(Self { family, domain })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_err("--spec", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Replaces the seed of every seeded-uniform parameter sequence.
    pub fn with_seed(mut self, seed: u64) -> Self {
        let reseed = |p: &mut ParamSequence| {
            if let ParamKind::SeededUniform { lo, hi, .. } = *p.kind() {
                *p = ParamSequence::seeded_uniform(lo, hi, seed).expect("bounds already validated");
            }
        };
        match &mut self.family {
            FamilySpec::Logistic(p) => reseed(p),
            FamilySpec::Affine { slopes, intercepts } => {
                reseed(slopes);
                reseed(intercepts);
            }
            FamilySpec::Polynomial { coefficients, .. } => coefficients.iter_mut().for_each(reseed),
        }
        self
    }

    pub fn build(&self) -> Result<MapSequence, CliError> {
        let domain = self.domain.unwrap_or_else(Interval::unit);
        Ok(match &self.family {
            FamilySpec::Logistic(p) => logistic(p.clone())?,
            FamilySpec::Affine { slopes, intercepts } => affine(slopes.clone(), intercepts.clone(), domain)?,
            FamilySpec::Polynomial {
                coefficients,
                smoothness,
            } => polynomial(coefficients.clone(), domain, *smoothness)?,
        })
    }
}
