use std::f64::consts::PI;

use modcap::capacity::{check_potential, solve_potential, SolverConfig};
use modcap::export::{capacity_json, field_csv, field_vtk};
use modcap::geometry::{Point, Sphere};
use modcap::grid::{
    build_domain, is_connected, parse_points, parse_rle_csv, polarize_mask, rasterize_polyline, restrict_polarized,
    to_rle_csv, CompactMask, DomainConfig, SetOp, ShapeSpec,
};
use modcap::modmetric::{modulus_metric, OptConfig};
use serde_json::json;

fn agm(mut a: f64, mut b: f64) -> f64 {
    while (a - b).abs() > 1e-15 * a {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

fn disk_metric_oracle(x: (f64, f64), y: (f64, f64)) -> f64 {
    // |x - y| / |1 - x conj(y)| with complex arithmetic
    let (dx, dy) = (x.0 - y.0, x.1 - y.1);
    let (re, im) = (1.0 - (x.0 * y.0 + x.1 * y.1), -(x.1 * y.0 - x.0 * y.1));
    let t = (dx * dx + dy * dy).sqrt() / (re * re + im * im).sqrt();
    let tp = (1.0 - t * t).sqrt();
    let mu = 0.5 * PI * agm(1.0, tp) / agm(1.0, t);
    2.0 * PI / mu
}

const RING_JSON: &str = r#"{"dim": 2,
  "grid": {"origin": [-1.1, -1.1], "extent": [2.2, 2.2], "cells": [129, 129]},
  "shapes": [{"op": "union", "type": "ball", "center": [0, 0], "radius": 1}]}"#;

#[test]
fn json_domain_to_exported_potential() {
    let config = DomainConfig::from_json(RING_JSON).unwrap();
    let d = build_domain(&config).unwrap();
    let k = CompactMask::from_shapes(&d, &[ShapeSpec::ball(SetOp::Union, &Point::zero(2), 0.5)]).unwrap();
    let res = solve_potential(&d, k.cells(), 2, &SolverConfig::default()).unwrap();
    let oracle = 2.0 * PI / 2f64.ln();
    assert!((res.value - oracle).abs() < 0.03 * oracle);
    assert!(check_potential(&res.field).is_clean());

    let prov = json!({"domain": config});
    let rec = capacity_json(&res, &prov).unwrap();
    for key in ["value", "iterations", "residual", "h", "n", "config"] {
        assert!(rec.get(key).is_some(), "missing {key}");
    }
    let vtk = field_vtk(&res.field, &prov);
    let values: Vec<f64> = vtk.lines().skip(10).map(|l| l.parse().unwrap()).collect();
    assert_eq!(values, res.field.values());
    let csv = field_csv(&res.field, &prov);
    let last = csv.lines().last().unwrap();
    assert_eq!(last, format!("{},0e0", 129 * 129 - 1));
}

#[test]
fn ring_capacity_is_translation_and_scale_invariant() {
    let solve = |center: Point, radius: f64| {
        let d = build_domain(&DomainConfig::ball(&center, radius, 129)).unwrap();
        let k = CompactMask::from_shapes(&d, &[ShapeSpec::ball(SetOp::Union, &center, 0.5 * radius)]).unwrap();
        solve_potential(&d, k.cells(), 2, &SolverConfig::default()).unwrap().value
    };
    let base = solve(Point::zero(2), 1.0);
    // identical grids relative to the ring, so the discrete values agree closely
    assert!((solve(Point::xy(3.0, -2.0), 1.0) - base).abs() < 1e-6 * base);
    assert!((solve(Point::zero(2), 7.5) - base).abs() < 1e-6 * base);
}

#[test]
fn masks_survive_rle_round_trip() {
    let d = build_domain(&DomainConfig::from_json(RING_JSON).unwrap()).unwrap();
    let pts = parse_points("0.5,0.1; 0.1,0.5; -0.4,-0.2").unwrap();
    let mask = rasterize_polyline(&pts, &d).unwrap();
    assert!(is_connected(mask.cells(), d.spec()));
    let text = to_rle_csv(mask.cells());
    assert_eq!(&parse_rle_csv(&text, d.spec().len()).unwrap(), mask.cells());
}

#[test]
fn restricted_polarization_keeps_both_symmetric_endpoints() {
    let d = build_domain(&DomainConfig::from_json(RING_JSON).unwrap()).unwrap();
    let s = Sphere::new(Point::xy(0.0, 0.0), 0.5).unwrap();
    // segment from inside the ball to outside it
    let pts = [Point::xy(0.2, 0.0), Point::xy(0.8, 0.0)];
    let mask = rasterize_polyline(&pts, &d).unwrap();
    let p = polarize_mask(mask.cells(), &s, &d).unwrap();
    let anchor = Point::xy(0.2, 0.0);
    let restricted = restrict_polarized(&p.cells, &p.sphere, &anchor, &d).unwrap();
    assert!(is_connected(restricted.cells(), d.spec()));
    let spec = d.spec();
    assert!(restricted.cells().contains(spec.cell_of(&anchor).unwrap()));
    // the image of the outer endpoint, 0.25 / 0.8 = 0.3125, lies in the ball
    assert!(restricted.cells().contains(spec.cell_of(&Point::xy(0.3125, 0.0)).unwrap()));
    assert!(restricted.cells().iter().all(|c| spec.center(c).norm() <= 0.5 + 1e-9));
}

#[test]
fn off_centre_disk_metric_matches_closed_form() {
    let d = build_domain(&DomainConfig::ball(&Point::zero(2), 1.0, 97)).unwrap();
    let (x, y) = ((0.2, 0.1), (-0.3, 0.25));
    let cfg = OptConfig { control_points: 3, restarts: 0, ..OptConfig::default() };
    let res = modulus_metric(&d, &Point::xy(x.0, x.1), &Point::xy(y.0, y.1), 2, &cfg).unwrap();
    let oracle = disk_metric_oracle(x, y);
    assert!((res.value - oracle).abs() < 0.06 * oracle, "{} vs {oracle}", res.value);
    assert!(is_connected(res.mask.cells(), d.spec()));
}
