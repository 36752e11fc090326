//! Writers for fields, level sets and result records.
//!
//! Every text output starts with the resolved configuration that produced
//! it: a `#` comment line for CSV, the `config` member for JSON. The legacy
//! VTK title line cannot hold arbitrary JSON, so it carries the config digest
//! instead; the matching JSON record holds the full configuration.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::capacity::{CapacityResult, PotentialField};
use crate::harness::config_digest;
use crate::modmetric::{LevelSet, MetricResult};
use crate::{Error, Result};

fn comment(provenance: &Value) -> String {
    format!("# config: {provenance}\n")
}

/// Legacy VTK structured points with one sample per cell centre.
pub fn field_vtk(field: &PotentialField, provenance: &Value) -> String {
    let spec = field.domain().spec();
    let n = spec.shape3();
    let h = spec.h();
    let o = spec.origin();
    let mut origin = [0.0; 3];
    for (axis, slot) in origin.iter_mut().enumerate().take(spec.dim()) {
        *slot = o.get(axis) + 0.5 * h;
    }
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "modcap potential config {}", config_digest(provenance));
    let _ = writeln!(out, "ASCII\nDATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", n[0], n[1], n[2]);
    let _ = writeln!(out, "ORIGIN {:e} {:e} {:e}", origin[0], origin[1], origin[2]);
    let _ = writeln!(out, "SPACING {h:e} {h:e} {h:e}");
    let _ = writeln!(out, "POINT_DATA {}", spec.len());
    let _ = writeln!(out, "SCALARS potential double 1\nLOOKUP_TABLE default");
    for v in field.values() {
        let _ = writeln!(out, "{v:e}");
    }
    out
}

/// `index,value` rows for every cell.
pub fn field_csv(field: &PotentialField, provenance: &Value) -> String {
    let mut out = comment(provenance);
    out.push_str("index,value\n");
    for (i, v) in field.values().iter().enumerate() {
        let _ = writeln!(out, "{i},{v:e}");
    }
    out
}

pub fn level_set_csv(ls: &LevelSet, provenance: &Value) -> String {
    comment(provenance) + &ls.to_csv()
}

fn with_config(record: impl Serialize, provenance: &Value) -> Result<Value> {
    let mut v = serde_json::to_value(record).map_err(|e| Error::Config(e.to_string()))?;
    v["config"] = provenance.clone();
    Ok(v)
}

/// `{value, iterations, residual, h, n, config}`.
pub fn capacity_json(result: &CapacityResult, provenance: &Value) -> Result<Value> {
    with_config(result.record(), provenance)
}

/// `{value, vertices, evals, converged, config}`.
pub fn metric_json(result: &MetricResult, provenance: &Value) -> Result<Value> {
    with_config(result.record(), provenance)
}

/// Level set samples, roundness and configuration as one JSON record.
pub fn level_set_json(ls: &LevelSet, ratio: Option<f64>, provenance: &Value) -> Value {
    json!({"center": ls.center, "level": ls.level, "samples": ls.samples, "roundness": ratio, "config": provenance})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{solve_potential, SolverConfig};
    use crate::geometry::Point;
    use crate::grid::{build_domain, CompactMask, DomainConfig, ShapeSpec, SetOp};

    fn small_result() -> CapacityResult {
        let d = build_domain(&DomainConfig::ball(&Point::zero(2), 1.0, 9)).unwrap();
        let k = CompactMask::from_shapes(&d, &[ShapeSpec::ball(SetOp::Union, &Point::zero(2), 0.3)]).unwrap();
        solve_potential(&d, k.cells(), 2, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn vtk_layout() {
        let r = small_result();
        let cfg = json!({"n": 2});
        let text = field_vtk(&r.field, &cfg);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert!(lines[1].contains(&config_digest(&cfg)));
        assert_eq!(lines[4], "DIMENSIONS 9 9 1");
        assert_eq!(lines[7], "POINT_DATA 81");
        assert_eq!(lines.len(), 10 + 81);
        let centre: f64 = lines[10 + 40].parse().unwrap();
        assert_eq!(centre, 1.0);
    }

    #[test]
    fn csv_and_json_carry_config() {
        let r = small_result();
        let cfg = json!({"n": 2, "grid": 9});
        let csv = field_csv(&r.field, &cfg);
        assert!(csv.starts_with("# config: {"));
        assert_eq!(csv.lines().nth(1), Some("index,value"));
        assert_eq!(csv.lines().count(), 2 + 81);
        let j = capacity_json(&r, &cfg).unwrap();
        assert_eq!(j["config"], cfg);
        assert_eq!(j["n"], 2);
        assert!(j["value"].as_f64().unwrap() > 0.0);
    }
}
