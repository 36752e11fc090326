//! Suites on the modulus metric: axioms, radial monotonicity, starlikeness,
//! cone conditions and roundness of small metric spheres.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{CaseRecord, SuiteConfig, SuiteReport};
use crate::geometry::{cone_alpha0, cone_radii, Point};
use crate::grid::{build_domain, DomainConfig, GridDomain};
use crate::modmetric::{mu_sphere, spread_directions, radial_profile, roundness_ratio, MetricSolver};
use crate::special::grotzsch_capacity;
use crate::{Error, Result};

fn unit_ball(cfg: &SuiteConfig) -> Result<(DomainConfig, GridDomain)> {
    let dim = cfg.n_exp as usize;
    let config = DomainConfig::ball(&Point::zero(dim), 1.0, cfg.grid);
    let domain = build_domain(&config)?;
    Ok((config, domain))
}

fn directions(dim: usize, count: usize) -> Vec<Point> {
    spread_directions(dim, count, 0.1)
}

fn off_centre(dim: usize, offset: f64, angle: f64) -> Point {
    let mut c = vec![0.0; dim];
    c[0] = offset * angle.cos();
    c[1] = offset * angle.sin();
    Point::new(&c).expect("finite")
}

fn failed(case: usize, check: &str, mut inputs: Value, err: &Error, slack: f64) -> CaseRecord {
    inputs["error"] = json!(err.to_string());
    CaseRecord::new(case, check, inputs, f64::NAN, f64::NAN, f64::NAN, slack)
}

fn random_in_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Point {
    loop {
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
        let p = Point::new(&c).expect("finite");
        if p.norm() < radius {
            return p;
        }
    }
}

fn axioms_case(cfg: &SuiteConfig, domain: &GridDomain, case: usize) -> Vec<CaseRecord> {
    let dim = cfg.n_exp as usize;
    let mut rng = cfg.case_rng(case);
    let x = random_in_ball(&mut rng, dim, 0.6);
    let y = random_in_ball(&mut rng, dim, 0.6);
    let z = random_in_ball(&mut rng, dim, 0.6);
    let inputs = json!({"x": x, "y": y, "z": z, "n": cfg.n_exp, "grid": cfg.grid, "opt": cfg.opt});
    let run = || -> Result<Vec<CaseRecord>> {
        let mut solver = MetricSolver::new(domain, cfg.n_exp, cfg.opt.clone())?;
        let mut mu = |a: &Point, b: &Point| solver.metric(a, b).map(|r| r.value);
        let mxx = mu(&x, &x)?;
        let mxy = mu(&x, &y)?;
        let myx = mu(&y, &x)?;
        let myz = mu(&y, &z)?;
        let mxz = mu(&x, &z)?;
        let s = cfg.slack;
        let mut out = vec![CaseRecord::new(case, "identity", inputs.clone(), mxx, 0.0, -mxx.abs(), 0.0)];
        if domain.inside_cell(&x) != domain.inside_cell(&y) {
            out.push(CaseRecord::strictly_below(case, "positivity", inputs.clone(), 0.0, mxy));
        }
        out.push(CaseRecord::close(case, "symmetry", inputs.clone(), mxy, myx, s));
        out.push(CaseRecord::at_most(case, "triangle", inputs.clone(), mxz, mxy + myz, s));
        out.push(CaseRecord::at_most(case, "triangle", inputs.clone(), mxy, mxz + myz, s));
        out.push(CaseRecord::at_most(case, "triangle", inputs.clone(), myz, mxy + mxz, s));
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![failed(case, "axioms", inputs.clone(), &e, cfg.slack)])
}

/// Symmetry, identity, positivity and the triangle inequality on random
/// triples in `B(0, 0.6)` of the unit disk (ball), and growth of
/// `mu(0, t e_1)` as `t` approaches the boundary.
pub fn verify_metric_axioms(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let (_, domain) = unit_ball(cfg)?;
    let mut rep = SuiteReport::new("metric-axioms", cfg.slack);
    let per_case: Vec<Vec<CaseRecord>> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| axioms_case(cfg, &domain, i))
        .collect();
    per_case.into_iter().flatten().for_each(|r| rep.push(r));

    let dim = cfg.n_exp as usize;
    let x0 = Point::zero(dim);
    let e1 = Point::unit(dim, 0);
    let ts = [0.3, 0.5, 0.7, 0.85];
    let inputs = json!({"x0": x0, "direction": e1, "t": ts, "n": cfg.n_exp, "grid": cfg.grid});
    let mut solver = MetricSolver::new(&domain, cfg.n_exp, cfg.opt.clone())?;
    let values: Result<Vec<f64>> = ts.iter().map(|&t| solver.metric(&x0, &(e1 * t)).map(|r| r.value)).collect();
    match values {
        Ok(v) => {
            for w in v.windows(2) {
                rep.push(CaseRecord::strictly_below(cfg.cases, "boundary_growth", inputs.clone(), w[0], w[1]));
            }
            rep.stat("boundary_growth_last", v[v.len() - 1]);
        }
        Err(e) => rep.push(failed(cfg.cases, "boundary_growth", inputs, &e, cfg.slack)),
    }
    Ok(rep)
}

/// Five probes of the cone with the given vertex, axis, opening and radius.
fn cone_probes(vertex: &Point, axis: &Point, alpha: f64, radius: f64) -> Vec<Point> {
    let perp = if axis.dim() == 2 {
        Point::xy(-axis.get(1), axis.get(0))
    } else {
        let e = if axis.get(2).abs() < 0.9 { Point::unit(3, 2) } else { Point::unit(3, 0) };
        (e - *axis * axis.dot(&e)).normalized().expect("nonzero")
    };
    [(1.0, 0.0), (0.5, 0.0), (1.0, alpha), (1.0, -alpha), (0.5, 0.5 * alpha)]
        .iter()
        .map(|&(f, phi)| *vertex + (*axis * phi.cos() + perp * phi.sin()) * (f * radius))
        .collect()
}

#[derive(Default)]
struct ConeTally {
    records: Vec<CaseRecord>,
    skipped: Vec<(String, Value)>,
    cones: usize,
    evaluated: usize,
}

fn sample_checks(
    cfg: &SuiteConfig,
    domain: &GridDomain,
    x0: &Point,
    level: f64,
    r0: f64,
    case: usize,
    y: Point,
) -> ConeTally {
    let mut tally = ConeTally::default();
    let h = domain.h();
    let s = cfg.slack;
    let Ok(mut solver) = MetricSolver::new(domain, cfg.n_exp, cfg.opt.clone()) else {
        return tally;
    };
    let mut mu = |p: &Point| solver.metric(x0, p).map(|r| r.value);

    for t in [0.25, 0.5, 0.75] {
        let p = *x0 + (y - *x0) * t;
        let inputs = json!({"x0": x0, "y": y, "t": t, "level": level});
        tally.records.push(match mu(&p) {
            Ok(v) => CaseRecord::at_most(case, "starlike", inputs, v, level, s),
            Err(e) => failed(case, "starlike", inputs, &e, s),
        });
    }

    let v = y - *x0;
    let r = v.norm();
    let axis = v * (1.0 / r);
    let radii = cone_alpha0(r, r0).and_then(|a0| Ok((0.5 * a0, cone_radii(0.5 * a0, r, r0)?)));
    let Ok((alpha, (rho_ext, rho_int))) = radii else {
        tally.cones += 2;
        tally
            .skipped
            .push(("sample outside the inscribed ball".into(), json!({"x0": x0, "y": y, "R0": r0})));
        return tally;
    };
    for (check, dir, rho) in [("cone_ext", axis, rho_ext), ("cone_int", axis * -1.0, rho_int)] {
        tally.cones += 1;
        let inputs = json!({"x0": x0, "vertex": y, "axis": dir, "alpha": alpha, "radius": rho, "level": level});
        if rho < 2.0 * h {
            tally.skipped.push((format!("{check} radius {rho:.3e} below 2h"), inputs));
            continue;
        }
        let mut any = false;
        for (k, p) in cone_probes(&y, &dir, alpha, rho).into_iter().enumerate() {
            let mut pin = inputs.clone();
            pin["probe"] = json!(k);
            if p.dist(x0) >= r0 || !domain.contains_point(&p) {
                tally.skipped.push((format!("{check} probe outside the safe region"), pin));
                continue;
            }
            any = true;
            tally.records.push(match mu(&p) {
                Ok(m) if check == "cone_ext" => CaseRecord::at_least(case, check, pin, m, level, s),
                Ok(m) => CaseRecord::at_most(case, check, pin, m, level, s),
                Err(e) => failed(case, check, pin, &e, s),
            });
        }
        if any {
            tally.evaluated += 1;
        }
    }
    tally
}

/// From an off-centre `x0` in the unit disk (ball): strictly increasing
/// radial profiles at `4h` spacing, a metric sphere at a safe level,
/// starlikeness of the sublevel set and the exterior/interior cone
/// conditions at half the critical opening.
pub fn verify_starlike_and_cones(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let (_, domain) = unit_ball(cfg)?;
    let dim = cfg.n_exp as usize;
    let h = domain.h();
    let mut rep = SuiteReport::new("starlike-cones", cfg.slack);
    let x0 = off_centre(dim, cfg.offset, 0.3);
    let r0 = domain.boundary_distance(&x0);
    let dirs = directions(dim, cfg.directions);
    rep.stat("R0", r0);

    // radial monotonicity
    let spacing = 4.0 * h;
    let ts: Vec<f64> = (0..).map(|j| j as f64 * spacing).take_while(|&t| t <= 0.9 * r0).collect();
    let profiles: Vec<(usize, Result<Vec<f64>>)> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, d)| (i, radial_profile(&domain, &x0, d, &ts, cfg.n_exp, &cfg.opt)))
        .collect();
    for (i, prof) in profiles {
        let inputs = json!({"x0": x0, "direction": dirs[i], "t": ts, "n": cfg.n_exp, "grid": cfg.grid});
        match prof {
            Ok(p) => {
                for w in p.windows(2) {
                    rep.push(CaseRecord::strictly_below(i, "radial_strict", inputs.clone(), w[0], w[1]));
                }
            }
            Err(e) => rep.push(failed(i, "radial_strict", inputs, &e, 0.0)),
        }
    }

    // one safe level: the sphere reaches half the inscribed radius towards the boundary
    let outward = x0.normalized().unwrap_or_else(|| Point::unit(dim, 0));
    let mut solver = MetricSolver::new(&domain, cfg.n_exp, cfg.opt.clone())?;
    let level = solver.metric(&x0, &(x0 + outward * (0.5 * r0)))?.value;
    rep.stat("level", level);
    let ls = match mu_sphere(&domain, &x0, level, &dirs, cfg.n_exp, &cfg.opt, cfg.level_tol) {
        Ok(ls) => ls,
        Err(e) => {
            rep.push(failed(0, "level_set", json!({"x0": x0, "level": level}), &e, cfg.slack));
            return Ok(rep);
        }
    };
    if let Ok(ratio) = roundness_ratio(&ls) {
        rep.stat("roundness", ratio);
    }
    for (i, s) in ls.samples.iter().enumerate() {
        let inputs = json!({"x0": x0, "direction": s.direction, "radius": s.radius, "level": level});
        rep.push(CaseRecord::close(i, "level_attained", inputs, s.mu, level, cfg.slack));
    }

    let tallies: Vec<(usize, ConeTally)> = ls
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(i, y)| (i, sample_checks(cfg, &domain, &x0, level, r0, i, y)))
        .collect();
    let (mut cones, mut evaluated) = (0, 0);
    for (i, t) in tallies {
        cones += t.cones;
        evaluated += t.evaluated;
        t.records.into_iter().for_each(|r| rep.push(r));
        for (reason, inputs) in t.skipped {
            rep.skip(i, reason, inputs);
        }
    }
    rep.stat("cones_total", cones as f64);
    rep.stat("cones_evaluated", evaluated as f64);
    Ok(rep)
}

/// Pseudo-hyperbolic radius with Grötzsch capacity `level`.
fn grotzsch_radius(level: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if grotzsch_capacity(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roundness `max |y - x0| / min |y - x0|` of metric spheres at levels
/// `t, t/2, t/4, ...` about an off-centre `x0`: non-increasing, and the last
/// one within `1 + slack`.
pub fn verify_roundness(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let (_, domain) = unit_ball(cfg)?;
    let dim = cfg.n_exp as usize;
    let h = domain.h();
    let mut rep = SuiteReport::new("roundness", cfg.slack);
    let x0 = off_centre(dim, cfg.offset, 0.0);
    let r0 = domain.boundary_distance(&x0);
    let dirs = directions(dim, cfg.directions);
    let outward = Point::unit(dim, 0);
    let mut solver = MetricSolver::new(&domain, cfg.n_exp, cfg.opt.clone())?;
    // As large as the search bracket allows, so that t/4 stays as coarse as
    // possible: the sphere reaches 0.82 R0 towards the nearest boundary point
    // and about 1.09 times that on the opposite ray, just inside 0.9 R0.
    let top = solver.metric(&x0, &(x0 + outward * (0.82 * r0)))?.value;
    rep.stat("R0", r0);

    let mut ratios: Vec<(f64, f64)> = Vec::new();
    for j in 0..cfg.cases {
        let level = top / 2f64.powi(j as i32);
        let inputs = json!({"x0": x0, "level": level, "directions": dirs.len(), "grid": cfg.grid, "n": cfg.n_exp});
        let ls = match mu_sphere(&domain, &x0, level, &dirs, cfg.n_exp, &cfg.opt, cfg.level_tol) {
            Ok(ls) => ls,
            Err(e) => {
                rep.push(failed(j, "level_set", inputs, &e, cfg.slack));
                continue;
            }
        };
        let min_r = ls.samples.iter().map(|s| s.radius).fold(f64::INFINITY, f64::min);
        rep.stat(&format!("level_{j}"), level);
        rep.stat(&format!("min_radius_{j}"), min_r);
        if min_r < 4.0 * h {
            rep.skip(j, format!("smallest radius {min_r:.3e} below 4h"), inputs);
            continue;
        }
        let ratio = roundness_ratio(&ls)?;
        rep.stat(&format!("ratio_{j}"), ratio);
        if dim == 2 && cfg.n_exp == 2 {
            // exact metric spheres of the disk are circles of pseudo-hyperbolic radius rho
            let a = x0.norm();
            let rho = grotzsch_radius(level);
            rep.stat(&format!("disk_ratio_{j}"), (1.0 + a * rho) / (1.0 - a * rho));
        }
        ratios.push((level, ratio));
    }
    for (j, w) in ratios.windows(2).enumerate() {
        let inputs = json!({"x0": x0, "levels": [w[0].0, w[1].0]});
        rep.push(CaseRecord::at_most(j, "non_increasing", inputs, w[1].1, w[0].1, 0.0));
    }
    match ratios.last() {
        Some(&(level, ratio)) => {
            let inputs = json!({"x0": x0, "level": level});
            rep.push(CaseRecord::at_most(ratios.len() - 1, "final_ratio", inputs, ratio, 1.0 + cfg.slack, 0.0));
        }
        None => rep.note("no level resolvable at this grid"),
    }
    if ratios.len() == 1 {
        rep.note("single level: ratio reported without a trend");
    }
    Ok(rep)
}
