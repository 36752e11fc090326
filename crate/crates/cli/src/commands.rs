use std::fs;
use std::path::{Path, PathBuf};

use modcap::capacity::{solve_potential, SolverConfig};
use modcap::export::{capacity_json, field_csv, field_vtk, level_set_csv, level_set_json, metric_json};
use modcap::geometry::{canonical_points, three_spheres, three_spheres_radius, Point, Sphere};
use modcap::grid::{
    build_domain, parse_points, parse_rle_csv, polarize_mask, rasterize_polyline, restrict_polarized, to_rle_csv,
    CellSet, CompactMask, DomainConfig, GridDomain, SetOp, ShapeSpec,
};
use modcap::harness::{Preset, Suite, SuiteConfig, SuiteReport};
use modcap::modmetric::{modulus_metric, mu_sphere, roundness_ratio, spread_directions, OptConfig};
use modcap::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{
    CapacityArgs, Cli, Command, ConvergenceArgs, KArgs, MetricArgs, OptArgs, PolarizeArgs, SolverArgs, SphereArgs,
    ThreeSpheresArgs, VerifyArgs,
};

/// Exit code of a verification run with failing checks.
const SUITE_FAILED: u8 = 1;

pub fn run(cli: &Cli) -> Result<u8> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    fs::create_dir_all(&cli.out)?;
    let ctx = Ctx { seed: cli.seed, out: cli.out.clone() };
    match &cli.command {
        Command::Capacity(a) => ctx.capacity(a),
        Command::Metric(a) => ctx.metric(a),
        Command::Sphere(a) => ctx.sphere(a),
        Command::Polarize(a) => ctx.polarize(a),
        Command::ThreeSpheres(a) => ctx.three_spheres(a),
        Command::Verify(a) => ctx.verify(a),
        Command::Convergence(a) => ctx.convergence(a),
    }
}

struct Ctx {
    seed: u64,
    out: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_domain(path: &Path) -> Result<(DomainConfig, GridDomain)> {
    let config = DomainConfig::from_json(&read(path)?)?;
    let domain = build_domain(&config)?;
    Ok((config, domain))
}

fn parse_point(text: &str) -> Result<Point> {
    match parse_points(text)?.as_slice() {
        [p] => Ok(*p),
        _ => Err(Error::Config(format!("expected one point, got {text:?}"))),
    }
}

/// `"c0,c1[,c2],r"`.
fn parse_ball(text: &str) -> Result<(Point, f64)> {
    let nums: Vec<f64> = text
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {c:?}: {e}"))))
        .collect::<Result<_>>()?;
    match nums.split_last() {
        Some((&r, c)) if c.len() == 2 || c.len() == 3 => Ok((Point::new(c)?, r)),
        _ => Err(Error::Config(format!("expected \"c0,c1[,c2],r\", got {text:?}"))),
    }
}

fn check_dim(domain: &GridDomain, p: &Point) -> Result<()> {
    if p.dim() != domain.dim() {
        return Err(Error::Config(format!("point {p:?} does not match the domain dimension {}", domain.dim())));
    }
    Ok(())
}

fn load_k(k: &KArgs, domain: &GridDomain) -> Result<(CellSet, Value)> {
    if let Some(text) = &k.k_ball {
        let (c, r) = parse_ball(text)?;
        check_dim(domain, &c)?;
        let shapes = [ShapeSpec::ball(SetOp::Union, &c, r)];
        let mask = CompactMask::from_shapes(domain, &shapes)?;
        return Ok((mask.cells().clone(), json!({"shapes": shapes})));
    }
    if let Some(path) = &k.k_shapes {
        let shapes: Vec<ShapeSpec> = read_json(path)?;
        let mask = CompactMask::from_shapes(domain, &shapes)?;
        return Ok((mask.cells().clone(), json!({"shapes": shapes})));
    }
    if let Some(path) = &k.k_points {
        let pts = parse_points(&read(path)?)?;
        let mask = rasterize_polyline(&pts, domain)?;
        return Ok((mask.cells().clone(), json!({"polyline": pts})));
    }
    if let Some(path) = &k.k_rle {
        let cells = parse_rle_csv(&read(path)?, domain.spec().len())?;
        return Ok((cells, json!({"rle": path})));
    }
    Err(Error::Config("no compact set given".into()))
}

fn solver_config(a: &SolverArgs) -> Result<SolverConfig> {
    let mut cfg = match &a.solver {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn opt_config(a: &OptArgs, seed: u64) -> Result<OptConfig> {
    let mut cfg = match &a.opt {
        Some(p) => read_json(p)?,
        None => OptConfig::default(),
    };
    cfg.seed = seed;
    if let Some(m) = a.control_points {
        cfg.control_points = m;
    }
    if let Some(r) = a.restarts {
        cfg.restarts = r;
    }
    if let Some(e) = a.max_evals {
        cfg.max_evals = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_n(n: u32) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::Config(format!("n must be 2 or 3, got {n}")))
    }
}

fn preset(text: &str) -> Result<Preset> {
    text.parse()
}

/// Overlays the members of a JSON object onto a serialized default.
fn merge<T: Serialize + DeserializeOwned>(base: &T, patch: &Value) -> Result<T> {
    let mut v = serde_json::to_value(base)?;
    match (v.as_object_mut(), patch.as_object()) {
        (Some(dst), Some(src)) => {
            for (k, val) in src {
                dst.insert(k.clone(), val.clone());
            }
        }
        _ => return Err(Error::Config("configuration must be a JSON object".into())),
    }
    serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))
}

impl Ctx {
    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    }

    fn write_json(&self, name: &str, v: &Value) -> Result<PathBuf> {
        self.write(name, &(serde_json::to_string_pretty(v)? + "\n"))
    }

    fn capacity(&self, a: &CapacityArgs) -> Result<u8> {
        check_n(a.solver.n)?;
        let (config, domain) = load_domain(&a.domain)?;
        let (k, kprov) = load_k(&a.k, &domain)?;
        let solver = solver_config(&a.solver)?;
        let prov = json!({"command": "capacity", "domain": config, "k": kprov, "n": a.solver.n, "solver": solver, "seed": self.seed});
        let result = solve_potential(&domain, &k, a.solver.n, &solver)?;
        self.write_json("capacity.json", &capacity_json(&result, &prov)?)?;
        if a.export_field {
            self.write("potential.vtk", &field_vtk(&result.field, &prov))?;
            self.write("potential.csv", &field_csv(&result.field, &prov))?;
        }
        println!("capacity {:.10}", result.value);
        println!("iterations {} residual {:.3e} h {:.6e}", result.iterations, result.residual, result.h);
        Ok(0)
    }

    fn metric(&self, a: &MetricArgs) -> Result<u8> {
        check_n(a.n)?;
        let (config, domain) = load_domain(&a.domain)?;
        let x = parse_point(&a.x)?;
        let y = parse_point(&a.y)?;
        check_dim(&domain, &x)?;
        check_dim(&domain, &y)?;
        let opt = opt_config(&a.opt, self.seed)?;
        let prov = json!({"command": "metric", "domain": config, "x": x, "y": y, "n": a.n, "opt": opt, "seed": self.seed});
        let result = modulus_metric(&domain, &x, &y, a.n, &opt)?;
        self.write_json("metric.json", &metric_json(&result, &prov)?)?;
        self.write("metric_mask.csv", &format!("# config: {prov}\n{}", to_rle_csv(result.mask.cells())))?;
        println!("mu {:.10}", result.value);
        println!("evals {} converged {}", result.evals, result.converged);
        Ok(0)
    }

    fn sphere(&self, a: &SphereArgs) -> Result<u8> {
        check_n(a.n)?;
        if a.levels == 0 || a.directions < 2 {
            return Err(Error::Config("need at least one level and two directions".into()));
        }
        let (config, domain) = load_domain(&a.domain)?;
        let x0 = parse_point(&a.x0)?;
        check_dim(&domain, &x0)?;
        let opt = opt_config(&a.opt, self.seed)?;
        let dirs = spread_directions(domain.dim(), a.directions, 0.0);
        let prov = json!({"command": "sphere", "domain": config, "x0": x0, "level": a.level, "levels": a.levels,
                          "directions": a.directions, "tol": a.tol, "n": a.n, "opt": opt, "seed": self.seed});
        let mut spheres = Vec::new();
        let mut ratios = Vec::new();
        for j in 0..a.levels {
            let level = a.level / 2f64.powi(j as i32);
            let ls = mu_sphere(&domain, &x0, level, &dirs, a.n, &opt, a.tol)?;
            let ratio = roundness_ratio(&ls)?;
            let (lo, hi) = ls
                .samples
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.radius), hi.max(s.radius)));
            let name = if a.levels == 1 { "sphere.csv".to_string() } else { format!("sphere_{j}.csv") };
            self.write(&name, &level_set_csv(&ls, &prov))?;
            println!("level {level:.6} roundness {ratio:.6} radius {lo:.6}..{hi:.6}");
            spheres.push(level_set_json(&ls, Some(ratio), &prov));
            ratios.push(ratio);
        }
        if ratios.len() > 1 {
            let rises: Vec<usize> = (1..ratios.len()).filter(|&j| ratios[j] > ratios[j - 1]).collect();
            if rises.is_empty() {
                println!("trend: non-increasing over {} levels, final ratio {:.6}", ratios.len(), ratios[ratios.len() - 1]);
            } else {
                println!("trend: ratio rises at levels {rises:?}, final ratio {:.6}", ratios[ratios.len() - 1]);
            }
        }
        self.write_json("sphere.json", &json!({"spheres": spheres, "ratios": ratios, "config": prov}))?;
        Ok(0)
    }

    fn polarize(&self, a: &PolarizeArgs) -> Result<u8> {
        let (config, domain) = load_domain(&a.domain)?;
        let (k, kprov) = load_k(&a.k, &domain)?;
        let (c, r) = parse_ball(&a.sphere)?;
        check_dim(&domain, &c)?;
        let sphere = Sphere::new(c, r)?;
        let p = polarize_mask(&k, &sphere, &domain)?;
        let cells = match &a.anchor {
            Some(text) => {
                let anchor = parse_point(text)?;
                check_dim(&domain, &anchor)?;
                restrict_polarized(&p.cells, &p.sphere, &anchor, &domain)?.cells().clone()
            }
            None => p.cells.clone(),
        };
        let mut prov = json!({"command": "polarize", "domain": config, "k": kprov, "sphere": p.sphere,
                              "anchor": a.anchor, "seed": self.seed});
        let mut summary = json!({"cells_before": k.len(), "cells_after": cells.len(), "off_grid": p.off_grid});
        println!("cells {} -> {} (reflections off grid: {})", k.len(), cells.len(), p.off_grid);
        if a.capacity {
            check_n(a.solver.n)?;
            let solver = solver_config(&a.solver)?;
            prov["n"] = json!(a.solver.n);
            prov["solver"] = json!(solver);
            let before = solve_potential(&domain, &k, a.solver.n, &solver)?.value;
            let after = solve_potential(&domain, &cells, a.solver.n, &solver)?.value;
            println!("capacity {before:.10} -> {after:.10}");
            summary["capacity_before"] = json!(before);
            summary["capacity_after"] = json!(after);
        }
        summary["config"] = prov.clone();
        self.write("polarized.csv", &format!("# config: {prov}\n{}", to_rle_csv(&cells)))?;
        self.write_json("polarize.json", &summary)?;
        Ok(0)
    }

    fn three_spheres(&self, a: &ThreeSpheresArgs) -> Result<u8> {
        let (x1, x2, x0, r) = match (a.theta, &a.x0) {
            (Some(theta), _) => {
                three_spheres_radius(a.k, theta)?;
                let (x1, x2) = canonical_points(a.k, theta);
                (x1, x2, Point::zero(2), 1.0)
            }
            (None, Some(x0)) => {
                let need = |o: &Option<String>, name: &str| {
                    o.as_deref().ok_or_else(|| Error::Config(format!("--{name} is required"))).and_then(parse_point)
                };
                let r = a.r.ok_or_else(|| Error::Config("--r is required".into()))?;
                (need(&a.x1, "x1")?, need(&a.x2, "x2")?, parse_point(x0)?, r)
            }
            (None, None) => return Err(Error::Config("give --theta or --x0 --r --x1 --x2".into())),
        };
        let res = three_spheres(&x1, &x2, &x0, r, a.k)?;
        let prov = json!({"command": "three-spheres", "k": a.k, "theta": a.theta, "x0": x0, "r": r, "x1": x1, "x2": x2});
        println!("center {:?}", res.sphere.center.coords());
        println!("radius {:.12}", res.sphere.radius);
        println!("theta {:.12}", res.theta);
        println!("branch {}", serde_json::to_value(res.branch)?.as_str().unwrap_or("?"));
        self.write_json("three_spheres.json", &json!({"result": res, "config": prov}))?;
        Ok(0)
    }

    fn run_suites(&self, selected: &[(Suite, SuiteConfig)], summary_name: &str) -> Result<u8> {
        let mut all_pass = true;
        let mut summary = Vec::new();
        for (suite, cfg) in selected {
            let started = std::time::Instant::now();
            let rep: SuiteReport = suite.run(cfg)?;
            let secs = started.elapsed().as_secs_f64();
            println!("{}", rep.table());
            println!("  ({secs:.1} s)");
            all_pass &= rep.pass();
            let mut v = serde_json::to_value(&rep)?;
            v["config"] = json!(cfg);
            v["seconds"] = json!(secs);
            self.write_json(&format!("report_{}.json", suite.name()), &v)?;
            summary.push(json!({"suite": suite.name(), "pass": rep.pass(), "passed": rep.passed,
                                "failed": rep.failed, "skipped": rep.skipped.len(), "seconds": secs, "config": cfg}));
        }
        self.write_json(summary_name, &json!({"pass": all_pass, "suites": summary}))?;
        println!("{}", if all_pass { "ALL PASS" } else { "FAILURES" });
        Ok(if all_pass { 0 } else { SUITE_FAILED })
    }

    fn verify(&self, a: &VerifyArgs) -> Result<u8> {
        let preset = preset(&a.grid)?;
        let mut suites = Vec::new();
        for name in &a.suites {
            if name == "all" {
                suites.extend(Suite::ALL);
            } else {
                suites.push(name.parse::<Suite>()?);
            }
        }
        suites.dedup();
        let patch: Option<Value> = a.config.as_deref().map(read_json).transpose()?;
        let mut selected = Vec::new();
        for suite in suites {
            let mut cfg = suite.config(preset);
            if let Some(p) = &patch {
                cfg = merge(&cfg, p)?;
            }
            cfg.seed = self.seed;
            cfg.opt.seed = self.seed;
            if let Some(c) = a.cases {
                cfg.cases = c;
            }
            if let Some(g) = a.cells {
                cfg.grid = g;
            }
            if let Some(n) = a.n {
                cfg.n_exp = n;
            }
            if let Some(s) = a.slack {
                cfg.slack = s;
            }
            cfg.validate()?;
            selected.push((suite, cfg));
        }
        self.run_suites(&selected, "verify.json")
    }

    fn convergence(&self, a: &ConvergenceArgs) -> Result<u8> {
        check_n(a.n)?;
        let mut cfg = Suite::Convergence.config(preset(&a.grid)?);
        cfg.seed = self.seed;
        cfg.n_exp = a.n;
        if let Some(c) = a.cells {
            cfg.grid = c;
        }
        if let Some(l) = a.levels {
            cfg.cases = l;
        }
        cfg.validate()?;
        self.run_suites(&[(Suite::Convergence, cfg)], "convergence.json")
    }
}
