//! Machine-readable run reports.
//!
//! JSON output has a fixed key order (struct fields in declaration order,
//! maps sorted) and prints floats as shortest round-trip decimals. Timing is
//! the last field and the only nondeterministic one.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gaussian::SeedRecord;
use crate::jobs::config::Format;
use crate::linalg::CMatrix;
use crate::wire::WireMatrix;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity; `null` when not finite.
    pub value: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub seed_record: Option<SeedRecord>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Option<f64>>,
    pub ranks: BTreeMap<String, usize>,
    pub matrices: BTreeMap<String, WireMatrix>,
    pub timing: Option<Timing>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            seed_record: None,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            ranks: BTreeMap::new(),
            matrices: BTreeMap::new(),
            timing: None,
        }
    }

    /// Records `value <= threshold`. Non-finite values fail.
    pub fn check_le(&mut self, name: &str, value: f64, threshold: f64) -> bool {
        let passed = value <= threshold;
        self.checks.push(Check { name: name.into(), passed, value: finite(value), threshold: finite(threshold) });
        passed
    }

    pub fn check_flag(&mut self, name: &str, passed: bool) -> bool {
        self.checks.push(Check { name: name.into(), passed, value: None, threshold: None });
        passed
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), finite(value));
    }

    pub fn rank(&mut self, name: &str, value: usize) {
        self.ranks.insert(name.into(), value);
    }

    pub fn matrix(&mut self, name: &str, m: &CMatrix) {
        self.matrices.insert(name.into(), WireMatrix::from_matrix(m));
    }

    /// All checks passed (vacuously true without checks).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn without_timing(&self) -> Self {
        Self { timing: None, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Every matrix as a `# name` line, the header `i,j,re,im`, then its
    /// entries row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (name, m) in &self.matrices {
            out.push_str(&format!("# {name}\ni,j,re,im\n"));
            for (i, row) in m.0.iter().enumerate() {
                for (j, z) in row.iter().enumerate() {
                    out.push_str(&format!("{i},{j},{},{}\n", z.re, z.im));
                }
            }
        }
        out
    }

    pub fn emit(&self, format: Format, w: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => {
                w.write_all(self.to_json()?.as_bytes())?;
                w.write_all(b"\n")?;
            }
            Format::Csv => w.write_all(self.to_csv().as_bytes())?,
        }
        Ok(())
    }
}
