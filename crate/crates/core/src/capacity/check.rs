//! Sanity checks on a computed potential: range, boundary values and the
//! discrete maximum principle.

use serde::{Deserialize, Serialize};

use super::PotentialField;

/// Slack allowed in the range and extremum checks.
const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutOfRange { cell: usize, value: f64 },
    ClampNotOne { cell: usize, value: f64 },
    OutsideNotZero { cell: usize, value: f64 },
    StrictLocalMax { cell: usize, value: f64 },
    StrictLocalMin { cell: usize, value: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub violations: Vec<Violation>,
    pub min: f64,
    pub max: f64,
}

impl PotentialReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `0 <= u <= 1`, `u = 1` on the clamp, `u = 0` outside `D` and the
/// absence of strict local extrema among the free cells.
pub fn check_potential(field: &PotentialField) -> PotentialReport {
    let domain = field.domain();
    let spec = domain.spec();
    let u = field.values();
    let mut report = PotentialReport {
        violations: Vec::new(),
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    for (cell, &value) in u.iter().enumerate() {
        report.min = report.min.min(value);
        report.max = report.max.max(value);
        if !(-CHECK_TOL..=1.0 + CHECK_TOL).contains(&value) {
            report.violations.push(Violation::OutOfRange { cell, value });
        }
        if !domain.is_inside(cell) {
            if value != 0.0 {
                report.violations.push(Violation::OutsideNotZero { cell, value });
            }
            continue;
        }
        if field.clamp().contains(cell) {
            if value != 1.0 {
                report.violations.push(Violation::ClampNotOne { cell, value });
            }
            continue;
        }
        let (lo, hi) = spec
            .neighbors(cell)
            .map(|nb| u[nb])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if value > hi + CHECK_TOL {
            report.violations.push(Violation::StrictLocalMax { cell, value });
        } else if value < lo - CHECK_TOL {
            report.violations.push(Violation::StrictLocalMin { cell, value });
        }
    }
    report
}
