//! Check reports, violation witnesses and the sweep driver.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::extreal::{signed_f64, ExtReal};
use crate::spaces::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One failed comparison, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub sample: usize,
    pub check: String,
    pub inputs: BTreeMap<String, Value>,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    /// `lhs - rhs`; positive means the inequality is exceeded.
    #[serde(with = "signed_f64")]
    pub slack: f64,
}

impl Witness {
    pub fn point(&self, key: &str) -> Option<Point> {
        self.inputs.get(key).and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        self.inputs.get(key).and_then(Value::as_f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: String,
    pub samples: usize,
    #[serde(default)]
    pub skipped: usize,
    pub status: Status,
    /// Largest `lhs - rhs` over every comparison made.
    #[serde(with = "signed_f64")]
    pub max_slack: f64,
    pub violations: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// How much an inequality may be exceeded before it counts as violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slack {
    /// Allowed excess is `tol * max(lhs, rhs)`.
    Relative(f64),
    Absolute(f64),
    Exact,
}

impl Slack {
    fn allowance(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Slack::Relative(tol) => tol * lhs.max(rhs),
            Slack::Absolute(tol) => tol,
            Slack::Exact => 0.0,
        }
    }
}

/// Signed excess `lhs - rhs` in `[-∞, ∞]`, with `∞ - ∞ = 0`.
pub fn excess(lhs: ExtReal, rhs: ExtReal) -> f64 {
    match (lhs.finite(), rhs.finite()) {
        (Some(a), Some(b)) => a - b,
        (None, None) => 0.0,
        (None, Some(_)) => f64::INFINITY,
        (Some(_), None) => f64::NEG_INFINITY,
    }
}

/// Whether `lhs <= rhs` holds under `slack`. Infinite sides compare exactly.
pub fn holds_leq(lhs: ExtReal, rhs: ExtReal, slack: Slack) -> bool {
    match (lhs.finite(), rhs.finite()) {
        (Some(a), Some(b)) => a <= b + slack.allowance(a, b),
        _ => lhs <= rhs,
    }
}

/// Named witness inputs.
#[derive(Debug, Default, Clone)]
pub struct Inputs(BTreeMap<String, Value>);

impl Inputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(mut self, key: &str, p: &Point) -> Self {
        self.0.insert(key.to_owned(), serde_json::to_value(p).expect("points serialize"));
        self
    }

    pub fn real(mut self, key: &str, v: f64) -> Self {
        let value = serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number);
        self.0.insert(key.to_owned(), value);
        self
    }

    pub fn int(mut self, key: &str, v: usize) -> Self {
        self.0.insert(key.to_owned(), Value::from(v));
        self
    }

    pub fn text(mut self, key: &str, v: &str) -> Self {
        self.0.insert(key.to_owned(), Value::from(v));
        self
    }
}

/// Per-sample accumulator handed to sweep closures.
pub(crate) struct SampleLog {
    index: usize,
    skipped: bool,
    compared: bool,
    max_slack: f64,
    violations: Vec<Witness>,
}

impl SampleLog {
    fn new(index: usize) -> Self {
        Self {
            index,
            skipped: false,
            compared: false,
            max_slack: f64::NEG_INFINITY,
            violations: Vec::new(),
        }
    }

    pub fn skip(&mut self) {
        self.skipped = true;
    }

    /// Records `lhs <= rhs`. Returns whether it held.
    pub fn leq(&mut self, check: &str, lhs: ExtReal, rhs: ExtReal, slack: Slack, inputs: impl FnOnce() -> Inputs) -> bool {
        let ok = holds_leq(lhs, rhs, slack);
        self.record(check, lhs, rhs, excess(lhs, rhs), ok, inputs)
    }

    /// Records the strict `lhs < rhs`.
    pub fn lt(&mut self, check: &str, lhs: ExtReal, rhs: ExtReal, inputs: impl FnOnce() -> Inputs) -> bool {
        self.record(check, lhs, rhs, excess(lhs, rhs), lhs < rhs, inputs)
    }

    /// Records `lhs = rhs`, up to `slack` for finite sides.
    pub fn eq(&mut self, check: &str, lhs: ExtReal, rhs: ExtReal, slack: Slack, inputs: impl FnOnce() -> Inputs) -> bool {
        let ok = holds_leq(lhs, rhs, slack) && holds_leq(rhs, lhs, slack);
        let gap = excess(lhs, rhs).abs();
        self.record(check, lhs, rhs, gap, ok, inputs)
    }

    /// Counts the sample as tested with nothing to compare numerically.
    pub fn pass(&mut self) {
        self.compared = true;
    }

    /// Records a failure that has no natural two-sided form.
    pub fn fail(&mut self, check: &str, lhs: ExtReal, rhs: ExtReal, inputs: impl FnOnce() -> Inputs) {
        self.record(check, lhs, rhs, excess(lhs, rhs), false, inputs);
    }

    fn record(
        &mut self,
        check: &str,
        lhs: ExtReal,
        rhs: ExtReal,
        slack: f64,
        ok: bool,
        inputs: impl FnOnce() -> Inputs,
    ) -> bool {
        self.compared = true;
        self.max_slack = self.max_slack.max(slack);
        if !ok {
            self.violations.push(Witness {
                sample: self.index,
                check: check.to_owned(),
                inputs: inputs().0,
                lhs,
                rhs,
                slack,
            });
        }
        ok
    }
}

/// Runs `body` on every sample (in parallel on the current rayon pool) and
/// merges the logs in sample order.
pub(crate) fn sweep<S, F>(property: &str, samples: &[S], body: F) -> Result<CheckReport>
where
    S: Sync,
    F: Fn(&S, &mut SampleLog) -> Result<()> + Sync,
{
    let logs = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut log = SampleLog::new(i);
            body(s, &mut log)?;
            Ok(log)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(property, logs))
}

fn merge(property: &str, logs: Vec<SampleLog>) -> CheckReport {
    let mut report = CheckReport {
        property: property.to_owned(),
        samples: 0,
        skipped: 0,
        status: Status::Pass,
        max_slack: f64::NEG_INFINITY,
        violations: Vec::new(),
        notes: Vec::new(),
    };
    for log in logs {
        if log.skipped && !log.compared {
            report.skipped += 1;
            continue;
        }
        report.samples += 1;
        report.max_slack = report.max_slack.max(log.max_slack);
        report.violations.extend(log.violations);
    }
    if !report.violations.is_empty() {
        report.status = Status::Fail;
    }
    report
}
