//! Frozen implied constants.
//!
//! The asymptotic estimates we test numerically come with unspecified
//! implied constants. The `calibrate` pipeline measures each ratio on a
//! small parameter lattice, multiplies by a 2x safety factor, and writes
//! the result here; afterwards the constants are regression thresholds.
//! Each entry carries a hash of its parameter lattice so that a constant
//! is never compared against measurements from a different experiment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// The safety factor applied to every measured constant before freezing.
pub const SAFETY_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalEntry {
    pub param_hash: u64,
    pub constant: f64,
}

/// A set of frozen constants, keyed by tag.
#[derive(Clone, Debug, Default)]
pub struct Calibration {
    entries: BTreeMap<String, CalEntry>,
}

impl Calibration {
    pub fn new() -> Calibration {
        Calibration::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Records `measured * SAFETY_FACTOR` under `tag`.
    pub fn freeze(&mut self, tag: &str, param_hash: u64, measured: f64) {
        self.entries.insert(
            tag.to_string(),
            CalEntry {
                param_hash,
                constant: measured * SAFETY_FACTOR,
            },
        );
    }

    /// Records a constant verbatim.
    pub fn set_raw(&mut self, tag: &str, param_hash: u64, constant: f64) {
        self.entries
            .insert(tag.to_string(), CalEntry { param_hash, constant });
    }

    /// Looks up a constant, checking the parameter hash.
    pub fn get(&self, tag: &str, param_hash: u64) -> Result<f64> {
        let entry = self
            .entries
            .get(tag)
            .ok_or_else(|| Error::MissingCalibration(tag.to_string()))?;
        if entry.param_hash != param_hash {
            return Err(Error::CalibrationMismatch {
                tag: tag.to_string(),
                found: entry.param_hash,
                expected: param_hash,
            });
        }
        Ok(entry.constant)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CalEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// One record per line: `tag param_hash constant`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (tag, e) in &self.entries {
            writeln!(out, "{tag} {:#018x} {:.11e}", e.param_hash, e.constant).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Calibration> {
        let mut cal = Calibration::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(tag), Some(hash), Some(constant)) = (it.next(), it.next(), it.next())
            else {
                return Err(Error::Parse(format!(
                    "calibration line {}: expected `tag param_hash constant`",
                    lineno + 1
                )));
            };
            let hash = hash.strip_prefix("0x").unwrap_or(hash);
            let param_hash = u64::from_str_radix(hash, 16)
                .map_err(|_| Error::Parse(format!("calibration line {}: bad hash", lineno + 1)))?;
            let constant: f64 = constant.parse().map_err(|_| {
                Error::Parse(format!("calibration line {}: bad constant", lineno + 1))
            })?;
            cal.set_raw(tag, param_hash, constant);
        }
        Ok(cal)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Calibration> {
        Calibration::from_text(&std::fs::read_to_string(path)?)
    }
}

/// FNV-1a hash of a canonical parameter description string.
pub fn param_hash(desc: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in desc.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
