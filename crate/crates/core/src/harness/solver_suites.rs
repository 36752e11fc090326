//! Suites driven by plain capacity solves: polarization, monotonicity and
//! grid convergence.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{CaseRecord, SuiteConfig, SuiteReport};
use crate::capacity::{ring_capacity_oracle, solve_potential, SolverConfig};
use crate::geometry::{Point, Sphere};
use crate::grid::{
    build_domain, polarize_mask, rasterize_polyline, CellSet, CompactMask, DomainConfig, GridConfig, GridDomain,
    SetOp, ShapeSpec,
};
use crate::{Error, Result};

/// Attempts at drawing a valid random configuration before a case is skipped.
const MAX_ATTEMPTS: usize = 100;

enum Outcome {
    Records(Vec<CaseRecord>),
    Skipped(String, Value),
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Point {
    let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-half..half)).collect();
    Point::new(&c).expect("finite coordinates")
}

/// `[-1, 1]^dim` grid carrying the given shapes.
fn box_config(dim: usize, cells: usize, shapes: Vec<ShapeSpec>) -> DomainConfig {
    DomainConfig {
        dim,
        grid: GridConfig {
            origin: vec![-1.0; dim],
            extent: vec![2.0; dim],
            cells: vec![cells; dim],
        },
        shapes,
    }
}

fn cube(op: SetOp, dim: usize, half: f64) -> ShapeSpec {
    ShapeSpec::cuboid(op, &vec![-half; dim], &vec![half; dim])
}

/// Inside cells with centre in the closed ball.
fn cells_in_ball(domain: &GridDomain, center: &Point, radius: f64) -> CellSet {
    let spec = domain.spec();
    (0..spec.len())
        .filter(|&c| domain.is_inside(c) && spec.center(c).dist(center) <= radius)
        .collect()
}

fn capacity(domain: &GridDomain, k: &CellSet, n_exp: u32, solver: &SolverConfig) -> Result<f64> {
    solve_potential(domain, k, n_exp, solver).map(|r| r.value)
}

fn failed(case: usize, check: &str, mut inputs: Value, err: &Error, slack: f64) -> CaseRecord {
    inputs["error"] = json!(err.to_string());
    CaseRecord::new(case, check, inputs, f64::NAN, f64::NAN, f64::NAN, slack)
}

fn collect(rep: &mut SuiteReport, outcomes: Vec<(usize, Outcome)>) {
    for (case, o) in outcomes {
        match o {
            Outcome::Records(rs) => rs.into_iter().for_each(|r| rep.push(r)),
            Outcome::Skipped(reason, inputs) => rep.skip(case, reason, inputs),
        }
    }
}

/// Random domain (box or box minus ball) and random polyline continuum.
fn random_condenser(rng: &mut ChaCha8Rng, dim: usize, cells: usize) -> Option<(DomainConfig, GridDomain, Vec<Point>, CompactMask)> {
    for _ in 0..MAX_ATTEMPTS {
        let mut shapes = vec![cube(SetOp::Union, dim, 0.9)];
        if rng.gen_bool(0.5) {
            let c = random_point(rng, dim, 0.5);
            shapes.push(ShapeSpec::ball(SetOp::Difference, &c, rng.gen_range(0.1..0.25)));
        }
        let config = box_config(dim, cells, shapes);
        let Ok(domain) = build_domain(&config) else { continue };
        let verts: Vec<Point> = (0..3).map(|_| random_point(rng, dim, 0.8)).collect();
        if let Ok(k) = rasterize_polyline(&verts, &domain) {
            return Some((config, domain, verts, k));
        }
    }
    None
}

fn polarization_case(cfg: &SuiteConfig, case: usize) -> Outcome {
    let dim = cfg.n_exp as usize;
    let mut rng = cfg.case_rng(case);
    let Some((config, domain, verts, k)) = random_condenser(&mut rng, dim, cfg.grid) else {
        return Outcome::Skipped("no admissible random condenser".into(), json!({"seed": cfg.seed}));
    };
    let mut polarized = None;
    for _ in 0..MAX_ATTEMPTS {
        let c = random_point(&mut rng, dim, 0.6);
        let s = Sphere::new(c, rng.gen_range(0.15..0.6)).expect("positive radius");
        // a ball missing K can map all of K onto cells too small to hold a centre
        let meets_k = k.cells().iter().any(|c| s.in_closed_ball(&domain.spec().center(c)));
        if !meets_k {
            continue;
        }
        if let Ok(p) = polarize_mask(k.cells(), &s, &domain) {
            polarized = Some(p);
            break;
        }
    }
    let inputs = json!({"domain": config, "k_vertices": verts, "n": cfg.n_exp});
    let Some(p) = polarized else {
        return Outcome::Skipped("no sphere meeting K with its closed ball in D".into(), inputs);
    };
    let mut inputs = inputs;
    inputs["sphere"] = json!(p.sphere);
    let result = capacity(&domain, k.cells(), cfg.n_exp, &cfg.solver)
        .and_then(|c| Ok((c, capacity(&domain, &p.cells, cfg.n_exp, &cfg.solver)?)));
    Outcome::Records(vec![match result {
        Ok((cap, cap_p)) => CaseRecord::at_most(case, "polarization", inputs, cap_p, cap, cfg.slack),
        Err(e) => failed(case, "polarization", inputs, &e, cfg.slack),
    }])
}

/// Polarization never increases capacity: `cap(D, K_p) <= cap(D, K)`, for
/// random condensers and spheres whose closed ball lies in `D`.
pub fn verify_polarization(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rep = SuiteReport::new("polarization", cfg.slack);
    let outcomes: Vec<(usize, Outcome)> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| (i, polarization_case(cfg, i)))
        .collect();
    collect(&mut rep, outcomes);
    Ok(rep)
}

fn monotonicity_case(cfg: &SuiteConfig, case: usize) -> Outcome {
    let dim = cfg.n_exp as usize;
    let mut rng = cfg.case_rng(case);
    let kind = case % 3;
    for _ in 0..MAX_ATTEMPTS {
        let Some((config1, d1, verts, k1)) = random_condenser(&mut rng, dim, cfg.grid) else {
            break;
        };
        // D_2 inside D_1: an extra hole, or the holes of D_1 in a smaller cube
        let shapes2: Vec<ShapeSpec> = match kind {
            0 => {
                let c = random_point(&mut rng, dim, 0.7);
                let mut s = config1.shapes.clone();
                s.push(ShapeSpec::ball(SetOp::Difference, &c, rng.gen_range(0.1..0.2)));
                s
            }
            2 => std::iter::once(cube(SetOp::Union, dim, 0.75))
                .chain(config1.shapes.iter().skip(1).cloned())
                .collect(),
            _ => config1.shapes.clone(),
        };
        let config2 = box_config(dim, cfg.grid, shapes2);
        let Ok(d2) = build_domain(&config2) else { continue };
        if k1.cells().iter().any(|c| !d2.is_inside(c)) {
            continue;
        }
        // K_2 contains K_1
        let k2 = if kind == 0 {
            k1.cells().clone()
        } else {
            let c = random_point(&mut rng, dim, 0.6);
            let extra = cells_in_ball(&d2, &c, rng.gen_range(0.05..0.15));
            if extra.is_empty() {
                continue;
            }
            k1.cells().union(&extra)
        };
        if k2.len() >= d2.inside_count() {
            continue;
        }
        let inputs = json!({"d1": config1, "d2": config2, "k1_vertices": verts, "kind": kind, "n": cfg.n_exp});
        let result = capacity(&d1, k1.cells(), cfg.n_exp, &cfg.solver)
            .and_then(|a| Ok((a, capacity(&d2, &k2, cfg.n_exp, &cfg.solver)?)));
        let mut out = Vec::new();
        match result {
            Ok((c1, c2)) => {
                out.push(CaseRecord::at_most(case, "nested", inputs.clone(), c1, c2, cfg.slack));
                if case == 0 {
                    out.push(CaseRecord::close(case, "identical", inputs, c1, capacity(&d1, k1.cells(), cfg.n_exp, &cfg.solver).unwrap_or(f64::NAN), 1e-12));
                }
            }
            Err(e) => out.push(failed(case, "nested", inputs, &e, cfg.slack)),
        }
        return Outcome::Records(out);
    }
    Outcome::Skipped("no admissible nested pair".into(), json!({"seed": cfg.seed, "kind": kind}))
}

/// `cap(D_1, K_1) <= cap(D_2, K_2)` for random `D_2 c D_1`, `K_1 c K_2`, and a
/// strict gap of at least 5% when a fat set is added to `K_1`.
pub fn verify_monotonicity(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut rep = SuiteReport::new("monotonicity", cfg.slack);
    let outcomes: Vec<(usize, Outcome)> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| (i, monotonicity_case(cfg, i)))
        .collect();
    collect(&mut rep, outcomes);

    let dim = cfg.n_exp as usize;
    let origin = Point::zero(dim);
    let config = DomainConfig::ball(&origin, 1.0, cfg.grid);
    let d = build_domain(&config)?;
    let mut at = vec![0.0; dim];
    at[0] = -0.3;
    let k1 = cells_in_ball(&d, &Point::new(&at)?, 0.15);
    at[0] = 0.4;
    let k3 = cells_in_ball(&d, &Point::new(&at)?, 0.2);
    let k2 = k1.union(&k3);
    let inputs = json!({"domain": config, "k1": {"center_x": -0.3, "radius": 0.15}, "k3": {"center_x": 0.4, "radius": 0.2}});
    let case = cfg.cases;
    match capacity(&d, &k1, cfg.n_exp, &cfg.solver).and_then(|a| Ok((a, capacity(&d, &k2, cfg.n_exp, &cfg.solver)?))) {
        Ok((c1, c2)) => rep.push(CaseRecord::at_least(case, "strict_gap", inputs, c2, 1.05 * c1, 0.0)),
        Err(e) => rep.push(failed(case, "strict_gap", inputs, &e, 0.0)),
    }
    Ok(rep)
}

fn ring(dim: usize, cells: usize, outer: f64, inner: f64, n_exp: u32, solver: &SolverConfig) -> Result<f64> {
    let origin = Point::zero(dim);
    let mut config = DomainConfig::ball(&origin, 1.0, cells);
    config.shapes = vec![ShapeSpec::ball(SetOp::Union, &origin, outer)];
    let d = build_domain(&config)?;
    let k = CompactMask::from_shapes(&d, &[ShapeSpec::ball(SetOp::Union, &origin, inner)])?;
    Ok(solve_potential(&d, k.cells(), n_exp, solver)?.value)
}

/// Ring condenser `B(0,1) \ B(0,1/2)` at `h`, `h/2`, `h/4`: shrinking
/// increments, agreement with the closed form at the finest grid and of the
/// Richardson extrapolation, and a monotone domain-exhaustion trend.
pub fn verify_convergence(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let dim = cfg.n_exp as usize;
    let mut rep = SuiteReport::new("convergence", cfg.slack);
    let oracle = ring_capacity_oracle(0.5, 1.0, cfg.n_exp)?;
    // h = 2 / (cells - 2) halves exactly
    let grids: Vec<usize> = std::iter::successors(Some(cfg.grid), |g| Some(2 * (g - 2) + 2))
        .take(cfg.cases.max(3))
        .collect();
    let caps = grids
        .iter()
        .map(|&g| ring(dim, g, 1.0, 0.5, cfg.n_exp, &cfg.solver))
        .collect::<Result<Vec<f64>>>()?;
    for (g, c) in grids.iter().zip(&caps) {
        rep.stat(&format!("cap_cells_{g}"), *c);
    }
    let inputs = json!({"grids": grids, "n": cfg.n_exp, "r": 0.5, "R": 1.0});
    for (i, w) in caps.windows(3).enumerate() {
        rep.push(CaseRecord::strictly_below(
            i,
            "increment_shrinks",
            inputs.clone(),
            (w[2] - w[1]).abs(),
            (w[1] - w[0]).abs(),
        ));
    }
    let m = caps.len();
    let (c0, c1, c2) = (caps[m - 3], caps[m - 2], caps[m - 1]);
    rep.push(CaseRecord::close(0, "finest_vs_oracle", inputs.clone(), c2, oracle, cfg.slack));

    let ratio = (c1 - c0) / (c2 - c1);
    let order = if ratio > 1.0 { ratio.log2() } else { 1.0 };
    let extrapolated = c2 + (c2 - c1) / (2f64.powf(order) - 1.0);
    rep.stat("observed_order", order);
    rep.stat("richardson", extrapolated);
    rep.stat("oracle", oracle);
    if cfg.n_exp == 2 {
        rep.push(CaseRecord::close(0, "richardson", inputs, extrapolated, oracle, 0.01));
    } else {
        rep.note(format!(
            "richardson estimate {extrapolated:.6} vs oracle {oracle:.6} (not asserted for n = 3)"
        ));
    }

    // exhaustion: growing D_k, shrinking K_k at a fixed grid
    let g = grids[grids.len().min(2) - 1];
    let pairs = [(0.8, 0.35), (0.9, 0.3), (1.0, 0.25)];
    let trend = pairs
        .iter()
        .map(|&(outer, inner)| ring(dim, g, outer, inner, cfg.n_exp, &cfg.solver))
        .collect::<Result<Vec<f64>>>()?;
    for (i, w) in trend.windows(2).enumerate() {
        rep.push(CaseRecord::strictly_below(
            i,
            "exhaustion",
            json!({"cells": g, "pairs": pairs, "n": cfg.n_exp}),
            w[1],
            w[0],
        ));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_polarization_run() {
        let cfg = SuiteConfig {
            cases: 4,
            grid: 33,
            slack: 0.02,
            ..SuiteConfig::default()
        };
        let rep = verify_polarization(&cfg).unwrap();
        assert!(rep.pass(), "{}", rep.table());
        assert_eq!(rep.records.len() + rep.skipped.len(), 4);
        // reproducible
        assert_eq!(verify_polarization(&cfg).unwrap(), rep);
    }

    #[test]
    fn small_monotonicity_run() {
        let cfg = SuiteConfig {
            cases: 3,
            grid: 33,
            slack: 0.02,
            ..SuiteConfig::default()
        };
        let rep = verify_monotonicity(&cfg).unwrap();
        assert!(rep.pass(), "{}", rep.table());
        assert!(rep.records_of("strict_gap").count() == 1);
    }

    #[test]
    fn coarse_convergence_trend() {
        let cfg = SuiteConfig {
            grid: 18,
            cases: 3,
            slack: 0.1,
            ..SuiteConfig::default()
        };
        let rep = verify_convergence(&cfg).unwrap();
        assert!(rep.records_of("exhaustion").all(|r| r.pass), "{}", rep.table());
        assert!(rep.stats.contains_key("richardson"));
    }
}
