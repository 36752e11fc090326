//! Case records and suite reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One checked inequality. `pass` iff `margin >= -slack`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: usize,
    pub check: String,
    /// FNV-1a hash of the serialized inputs.
    pub digest: String,
    pub inputs: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub slack: f64,
    pub pass: bool,
}

/// FNV-1a digest of the compact JSON text.
pub fn digest(inputs: &Value) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in inputs.to_string().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

impl CaseRecord {
    pub fn new(case: usize, check: &str, inputs: Value, lhs: f64, rhs: f64, margin: f64, slack: f64) -> Self {
        CaseRecord {
            case,
            check: check.to_string(),
            digest: digest(&inputs),
            inputs,
            lhs,
            rhs,
            margin,
            slack,
            // NaN margins fail
            pass: margin >= -slack,
        }
    }

    /// `lhs <= rhs` with relative slack.
    pub fn at_most(case: usize, check: &str, inputs: Value, lhs: f64, rhs: f64, slack: f64) -> Self {
        let scale = rhs.abs().max(f64::MIN_POSITIVE);
        Self::new(case, check, inputs, lhs, rhs, (rhs - lhs) / scale, slack)
    }

    /// `lhs >= rhs` with relative slack.
    pub fn at_least(case: usize, check: &str, inputs: Value, lhs: f64, rhs: f64, slack: f64) -> Self {
        let scale = rhs.abs().max(f64::MIN_POSITIVE);
        Self::new(case, check, inputs, lhs, rhs, (lhs - rhs) / scale, slack)
    }

    /// `|lhs - rhs| <= slack * max(|lhs|, |rhs|)`.
    pub fn close(case: usize, check: &str, inputs: Value, lhs: f64, rhs: f64, slack: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        Self::new(case, check, inputs, lhs, rhs, -(lhs - rhs).abs() / scale, slack)
    }

    /// `|lhs - rhs| <= tol` in absolute terms.
    pub fn close_abs(case: usize, check: &str, inputs: Value, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(case, check, inputs, lhs, rhs, -(lhs - rhs).abs(), tol)
    }

    /// `lhs < rhs` strictly, relative to `|rhs|`.
    pub fn strictly_below(case: usize, check: &str, inputs: Value, lhs: f64, rhs: f64) -> Self {
        let scale = rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE);
        let margin = (rhs - lhs) / scale;
        let mut r = Self::new(case, check, inputs, lhs, rhs, margin, 0.0);
        r.pass = margin > 0.0;
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub case: usize,
    pub reason: String,
    pub inputs: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub slack: f64,
    pub records: Vec<CaseRecord>,
    pub skipped: Vec<SkipRecord>,
    pub passed: usize,
    pub failed: usize,
    /// Smallest `margin + slack` over the records.
    pub worst_margin: f64,
    /// Named counters and measured quantities.
    pub stats: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: &str, slack: f64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            slack,
            records: Vec::new(),
            skipped: Vec::new(),
            passed: 0,
            failed: 0,
            worst_margin: f64::INFINITY,
            stats: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, r: CaseRecord) {
        if r.pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        let m = r.margin + r.slack;
        if m < self.worst_margin || m.is_nan() {
            self.worst_margin = m;
        }
        self.records.push(r);
    }

    pub fn skip(&mut self, case: usize, reason: impl Into<String>, inputs: Value) {
        self.skipped.push(SkipRecord {
            case,
            reason: reason.into(),
            inputs,
        });
    }

    pub fn stat(&mut self, name: &str, value: f64) {
        self.stats.insert(name.to_string(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// No failures and at least one evaluated record.
    pub fn pass(&self) -> bool {
        self.failed == 0 && !self.records.is_empty()
    }

    pub fn records_of<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a CaseRecord> + 'a {
        self.records.iter().filter(move |r| r.check == check)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Human-readable summary with one row per check kind and the failures.
    pub fn table(&self) -> String {
        let mut kinds: Vec<&str> = Vec::new();
        for r in &self.records {
            if !kinds.contains(&r.check.as_str()) {
                kinds.push(&r.check);
            }
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "suite {}: {} ({} passed, {} failed, {} skipped, worst margin {:.3e})",
            self.suite,
            if self.pass() { "PASS" } else { "FAIL" },
            self.passed,
            self.failed,
            self.skipped.len(),
            self.worst_margin
        );
        let _ = writeln!(out, "  {:<24} {:>6} {:>6} {:>12}", "check", "pass", "fail", "worst");
        for k in kinds {
            let (mut p, mut f, mut w) = (0, 0, f64::INFINITY);
            for r in self.records_of(k) {
                if r.pass {
                    p += 1
                } else {
                    f += 1
                }
                w = w.min(r.margin + r.slack);
            }
            let _ = writeln!(out, "  {k:<24} {p:>6} {f:>6} {w:>12.3e}");
        }
        for r in self.failures().take(20) {
            let _ = writeln!(
                out,
                "  FAILED case {} {}: lhs {:.6e} rhs {:.6e} margin {:.3e} inputs {}",
                r.case, r.check, r.lhs, r.rhs, r.margin, r.inputs
            );
        }
        for s in &self.skipped {
            let _ = writeln!(out, "  skipped case {}: {}", s.case, s.reason);
        }
        for (k, v) in &self.stats {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}
