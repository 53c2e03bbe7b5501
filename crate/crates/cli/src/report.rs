//! Report document and rendering.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const TOOL: &str = "modmetric";

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the echoed config, as compact JSON.
    pub config_hash: String,
    /// The config with every default filled in.
    pub config: RunConfig,
}

impl Header {
    pub fn new(command: &'static str, config: RunConfig) -> Self {
        let canonical = serde_json::to_string(&config).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hash = String::from("sha256:");
        for byte in digest.iter() {
            write!(hash, "{byte:02x}").expect("writing to a string");
        }
        Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: hash,
            config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Pass,
    Fail,
    /// Informational output; never affects the exit code.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub name: String,
    pub status: EntryStatus,
    pub violations: usize,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub entry: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub status: EntryStatus,
    pub entries: usize,
    pub failed: usize,
    pub violations: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub header: Header,
    pub results: Vec<Entry>,
    pub errors: Vec<ErrorRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(header: Header, results: Vec<Entry>, errors: Vec<ErrorRecord>) -> Self {
        let failed = results.iter().filter(|e| e.status == EntryStatus::Fail).count();
        let violations = results.iter().map(|e| e.violations).sum();
        let status = if failed == 0 && errors.is_empty() {
            EntryStatus::Pass
        } else {
            EntryStatus::Fail
        };
        let summary = Summary {
            status,
            entries: results.len(),
            failed,
            violations,
            errors: errors.len(),
        };
        Self {
            header,
            results,
            errors,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.status == EntryStatus::Pass
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", h.tool, h.version, h.command);
        let _ = writeln!(out, "config {}", h.config_hash);
        let _ = writeln!(
            out,
            "seed {} samples {} slack_tol {}",
            h.config.plan.seed, h.config.plan.n_samples, h.config.plan.slack_tol
        );
        for e in &self.results {
            let status = match e.status {
                EntryStatus::Pass => "pass",
                EntryStatus::Fail => "FAIL",
                EntryStatus::Info => "info",
            };
            let _ = write!(out, "[{status}] {}", e.name);
            if e.status != EntryStatus::Info {
                let _ = write!(out, " violations={}", e.violations);
            }
            if let Value::Object(map) = &e.detail {
                for (k, v) in map {
                    if is_scalar(v) {
                        let _ = write!(out, " {k}={}", scalar(v));
                    }
                }
            }
            out.push('\n');
            if let Some(Value::Array(witnesses)) = e.detail.get("violations") {
                if let Some(first) = witnesses.first() {
                    let _ = writeln!(out, "    first witness: {first}");
                }
            }
        }
        for err in &self.errors {
            let _ = writeln!(out, "[error] {}: {}", err.entry, err.message);
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "summary: {} ({} entries, {} failed, {} violations, {} errors)",
            if self.passed() { "pass" } else { "fail" },
            s.entries,
            s.failed,
            s.violations,
            s.errors
        );
        out
    }
}

fn is_scalar(v: &Value) -> bool {
    matches!(v, Value::Bool(_) | Value::Number(_) | Value::String(_) | Value::Null)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
