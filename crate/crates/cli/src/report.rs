use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use qdouble::protocols::depth::DepthCertificate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One verified quantity. `bound` says whether `measured` must stay below
/// (`max`) or above (`min`) the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRow {
    pub name: String,
    pub bound: Bound,
    pub tolerance: f64,
    pub measured: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthRowOut {
    pub size: String,
    pub quantum_depth: usize,
    pub adaptive_rounds: usize,
    pub gate_count: usize,
    pub max_support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthTable {
    pub protocol: String,
    pub rows: Vec<DepthRowOut>,
    pub depth_constant: bool,
    pub rounds_constant: bool,
    pub support_bounded: bool,
    pub passed: bool,
}

impl From<&DepthCertificate> for DepthTable {
    fn from(c: &DepthCertificate) -> Self {
        DepthTable {
            protocol: c.protocol.clone(),
            rows: c
                .rows
                .iter()
                .map(|r| DepthRowOut {
                    size: r.size.to_string(),
                    quantum_depth: r.report.quantum_depth,
                    adaptive_rounds: r.report.adaptive_rounds,
                    gate_count: r.report.gate_count,
                    max_support: r.report.max_support,
                })
                .collect(),
            depth_constant: c.depth_constant,
            rounds_constant: c.rounds_constant,
            support_bounded: c.support_bounded,
            passed: c.passed(),
        }
    }
}

/// Everything except `timings_ms` is a function of the command line and config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub artifact_version: String,
    pub command: String,
    pub config: Value,
    pub checks: Vec<CheckRow>,
    pub runs: Vec<Value>,
    pub statistics: BTreeMap<String, Value>,
    pub depth: Vec<DepthTable>,
    pub passed: bool,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Report {
        Report {
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.to_string(),
            config,
            checks: Vec::new(),
            runs: Vec::new(),
            statistics: BTreeMap::new(),
            depth: Vec::new(),
            passed: true,
            timings_ms: BTreeMap::new(),
        }
    }

    /// Records `measured ≤ tolerance`.
    pub fn check_max(&mut self, name: impl Into<String>, tolerance: f64, measured: f64) {
        self.push(name.into(), Bound::Max, tolerance, measured, measured <= tolerance);
    }

    /// Records `measured ≥ tolerance`.
    pub fn check_min(&mut self, name: impl Into<String>, tolerance: f64, measured: f64) {
        self.push(name.into(), Bound::Min, tolerance, measured, measured >= tolerance);
    }

    fn push(&mut self, name: String, bound: Bound, tolerance: f64, measured: f64, passed: bool) {
        let measured = if measured.is_finite() { measured } else { f64::MAX };
        self.checks.push(CheckRow { name, bound, tolerance, measured, passed });
        self.passed &= passed;
    }

    pub fn add_depth(&mut self, c: &DepthCertificate) {
        self.passed &= c.passed();
        self.depth.push(c.into());
    }

    pub fn stat(&mut self, key: &str, v: impl Serialize) {
        self.statistics.insert(key.to_string(), serde_json::to_value(v).expect("serializable statistic"));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }

    /// Human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            out += &match c.bound {
                Bound::Max => format!("{verdict} {}: {:.3e} <= {:e}\n", c.name, c.measured, c.tolerance),
                Bound::Min => format!("{verdict} {}: {} >= {}\n", c.name, c.measured, c.tolerance),
            };
        }
        for t in &self.depth {
            out += &format!("{} {}\n", if t.passed { "PASS" } else { "FAIL" }, t.protocol);
            out += "  size      depth  rounds  gates  support\n";
            for r in &t.rows {
                out += &format!(
                    "  {:<8} {:>6} {:>7} {:>6} {:>8}\n",
                    r.size, r.quantum_depth, r.adaptive_rounds, r.gate_count, r.max_support
                );
            }
        }
        for (k, v) in &self.statistics {
            out += &format!("{k}: {v}\n");
        }
        out += if self.passed { "result: pass\n" } else { "result: fail\n" };
        out
    }
}
