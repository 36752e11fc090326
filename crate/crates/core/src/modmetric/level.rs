//! Radial profiles, `mu_D`-spheres and their roundness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MetricSolver, OptConfig};
use crate::geometry::Point;
use crate::grid::GridDomain;
use crate::{Error, Result};

/// Fraction of the inscribed radius bracketing every level-set search.
pub const SAFE_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSample {
    pub direction: Point,
    /// Crossing of the level, interpolated across the final bracket.
    pub radius: f64,
    /// Metric value measured at the bracket end closer to the level.
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub center: Point,
    pub level: f64,
    pub samples: Vec<LevelSample>,
}

impl LevelSet {
    pub fn points(&self) -> Vec<Point> {
        self.samples
            .iter()
            .map(|s| self.center + s.direction * s.radius)
            .collect()
    }

    /// CSV rows `d0,d1[,d2],radius,mu`.
    pub fn to_csv(&self) -> String {
        let dim = self.center.dim();
        let mut out = String::new();
        let names = ["d0", "d1", "d2"];
        out.push_str(&names[..dim].join(","));
        out.push_str(",radius,mu\n");
        for s in &self.samples {
            for c in s.direction.coords() {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{},{}\n", s.radius, s.mu));
        }
        out
    }
}

/// `max r / min r` over the samples.
pub fn roundness_ratio(ls: &LevelSet) -> Result<f64> {
    if ls.samples.len() < 2 {
        return Err(Error::Parameter("roundness needs two or more samples".into()));
    }
    let (lo, hi) = ls
        .samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.radius), hi.max(s.radius)));
    if !(lo > 0.0) {
        return Err(Error::Parameter("level set has a nonpositive radius".into()));
    }
    Ok(hi / lo)
}

fn unit(direction: &Point, dim: usize) -> Result<Point> {
    if direction.dim() != dim {
        return Err(Error::Parameter("direction dimension does not match the domain".into()));
    }
    direction
        .normalized()
        .ok_or_else(|| Error::Parameter("direction must be nonzero".into()))
}

fn inscribed_radius(domain: &GridDomain, x0: &Point) -> Result<f64> {
    if !domain.contains_point(x0) {
        return Err(Error::Domain(format!("x0 = {:?} is outside D", x0.coords())));
    }
    Ok(domain.boundary_distance(x0))
}

/// `mu_D(x0, x0 + t * direction)` for each `t`; every sample must lie in `B(x0, R_0)`.
pub fn radial_profile(
    domain: &GridDomain,
    x0: &Point,
    direction: &Point,
    t_values: &[f64],
    n_exp: u32,
    cfg: &OptConfig,
) -> Result<Vec<f64>> {
    let dir = unit(direction, domain.dim())?;
    let r0 = inscribed_radius(domain, x0)?;
    if let Some(t) = t_values.iter().find(|&&t| !(0.0..r0).contains(&t)) {
        return Err(Error::Geometry(format!(
            "sample t = {t} outside the inscribed ball of radius {r0}"
        )));
    }
    let mut solver = MetricSolver::new(domain, n_exp, cfg.clone())?;
    t_values
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(0.0)
            } else {
                solver.metric(x0, &(*x0 + dir * t)).map(|r| r.value)
            }
        })
        .collect()
}

/// Maps metric values to a scale roughly linear in the distance for small
/// distances, `exp(-(omega / mu)^(1/(n-1)))`.
fn linearize(mu: f64, n_exp: u32) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    let omega = if n_exp == 2 { 2.0 * std::f64::consts::PI } else { 4.0 * std::f64::consts::PI };
    (-(omega / mu).powf(1.0 / (n_exp as f64 - 1.0))).exp()
}

fn solve_ray(
    solver: &mut MetricSolver<'_>,
    x0: &Point,
    dir: Point,
    level: f64,
    hi_t: f64,
    tol: f64,
    hint: Option<f64>,
) -> Result<LevelSample> {
    let n_exp = solver.n_exp();
    let domain = solver.domain();
    let h = domain.h();
    let mut mu_at = |t: f64| -> Result<f64> { solver.metric(x0, &(*x0 + dir * t)).map(|r| r.value) };

    let target = linearize(level, n_exp);
    let (mut lo, mut flo, mut mlo) = (0.0, -target, 0.0);
    let (mut hi, mut mhi) = (hi_t, f64::NAN);
    if let Some(r) = hint.filter(|&r| r > 0.0 && r < hi_t) {
        // try a narrow bracket around the expected radius first
        let (a, b) = (0.7 * r, (1.4 * r).min(hi_t));
        let ma = mu_at(a)?;
        if ma < level {
            (lo, flo, mlo) = (a, linearize(ma, n_exp) - target, ma);
            let mb = mu_at(b)?;
            if mb >= level {
                (hi, mhi) = (b, mb);
            }
        } else {
            (hi, mhi) = (a, ma);
        }
    }
    if mhi.is_nan() {
        mhi = mu_at(hi)?;
        if mhi < level {
            return Err(Error::LevelEscapesSafeRegion);
        }
    }
    let mu_hi = mhi;
    let mut fhi = linearize(mu_hi, n_exp) - target;
    let sample = |t: f64, mu: f64| LevelSample {
        direction: dir,
        radius: t,
        mu,
    };
    // Illinois-modified regula falsi with a bisection safeguard
    let mut side = 0i8;
    // unmodified values at the bracket ends
    let (mut glo, mut ghi) = (flo, fhi);
    for _ in 0..100 {
        let settled = (mlo - level).abs() <= tol * level && (mhi - level).abs() <= tol * level;
        if hi - lo < h / 16.0 || (lo > 0.0 && settled) {
            break;
        }
        let width = hi - lo;
        let mut t = if fhi != flo { lo - flo * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        if !(t > lo + 0.01 * width && t < hi - 0.01 * width) {
            t = 0.5 * (lo + hi);
        }
        let mu = mu_at(t)?;
        let f = linearize(mu, n_exp) - target;
        if mu < level {
            lo = t;
            flo = f;
            glo = f;
            mlo = mu;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = f;
            ghi = f;
            mhi = mu;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    // discrete values jump where the rasterized curve gains a cell; the
    // bracket now straddles such a jump or has both ends within tolerance
    let nearer_lo = (mlo - level).abs() <= (mhi - level).abs() && lo > 0.0;
    let mu = if nearer_lo { mlo } else { mhi };
    let radius = if ghi > glo { lo + (hi - lo) * (-glo / (ghi - glo)).clamp(0.0, 1.0) } else { 0.5 * (lo + hi) };
    Ok(sample(radius, mu))
}

/// Level set `S(x0, level)` of `mu_D(x0, .)` along the given rays.
///
/// Each ray is searched on `[0, 0.9 R_0]` with `R_0` the inscribed radius at
/// `x0`. The first ray's radius seeds a narrow starting bracket for the rest,
/// which are solved concurrently; results keep input order.
pub fn mu_sphere(
    domain: &GridDomain,
    x0: &Point,
    level: f64,
    directions: &[Point],
    n_exp: u32,
    cfg: &OptConfig,
    tol: f64,
) -> Result<LevelSet> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::Parameter(format!("level must be positive, got {level}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let r0 = inscribed_radius(domain, x0)?;
    let dirs = directions
        .iter()
        .map(|d| unit(d, domain.dim()))
        .collect::<Result<Vec<_>>>()?;
    if dirs.is_empty() {
        return Err(Error::Parameter("no directions given".into()));
    }
    let ray = |dir: Point, hint: Option<f64>| {
        let mut solver = MetricSolver::new(domain, n_exp, cfg.clone())?;
        solve_ray(&mut solver, x0, dir, level, SAFE_FRACTION * r0, tol, hint)
    };
    // the first ray runs over the full bracket and seeds the others
    let first = ray(dirs[0], None)?;
    let hint = Some(first.radius);
    let mut samples = vec![first];
    samples.extend(dirs[1..].par_iter().map(|&dir| ray(dir, hint)).collect::<Result<Vec<_>>>()?);
    Ok(LevelSet {
        center: *x0,
        level,
        samples,
    })
}

/// `count` unit vectors evenly spaced on the circle, starting at angle `phase`.
pub fn circle_directions(count: usize, phase: f64) -> Vec<Point> {
    (0..count)
        .map(|i| {
            let a = phase + 2.0 * std::f64::consts::PI * i as f64 / count as f64;
            Point::xy(a.cos(), a.sin())
        })
        .collect()
}

/// Evenly spread unit vectors: `circle_directions(count, phase)` in the
/// plane, a Fibonacci lattice on the sphere in space.
pub fn spread_directions(dim: usize, count: usize, phase: f64) -> Vec<Point> {
    if dim == 2 {
        return circle_directions(count, phase);
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let a = phase + golden * i as f64;
            Point::xyz(r * a.cos(), r * a.sin(), z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, DomainConfig};
    use crate::special::{grotzsch_capacity, grotzsch_modulus};

    #[test]
    fn roundness_of_synthetic_samples() {
        let mk = |r: f64| LevelSample {
            direction: Point::xy(1.0, 0.0),
            radius: r,
            mu: 1.0,
        };
        let ls = LevelSet {
            center: Point::xy(0.0, 0.0),
            level: 1.0,
            samples: vec![mk(1.0), mk(1.1)],
        };
        assert!((roundness_ratio(&ls).unwrap() - 1.1).abs() < 1e-15);
        let single = LevelSet {
            samples: vec![mk(1.0)],
            ..ls
        };
        assert!(roundness_ratio(&single).is_err());
    }

    #[test]
    fn linearize_is_increasing() {
        let mut prev = 0.0;
        for i in 1..50 {
            let v = linearize(i as f64 * 0.3, 2);
            assert!(v > prev);
            prev = v;
        }
        // small Grötzsch radii map to a near-linear scale
        let a = linearize(grotzsch_capacity(0.01), 2) / 0.01;
        let b = linearize(grotzsch_capacity(0.02), 2) / 0.02;
        assert!((a / b - 1.0).abs() < 1e-3);
        assert!(grotzsch_modulus(0.5) > 0.0);
    }

    #[test]
    fn spread_directions_are_unit_and_balanced() {
        for dim in [2, 3] {
            let dirs = spread_directions(dim, 24, 0.1);
            assert_eq!(dirs.len(), 24);
            let mut sum = Point::zero(dim);
            for d in &dirs {
                assert!((d.norm() - 1.0).abs() < 1e-12);
                sum = sum + *d;
            }
            // evenly spread vectors nearly cancel
            assert!(sum.norm() < 0.1 * 24.0, "{dim}: {}", sum.norm());
        }
    }

    #[test]
    fn centred_disk_level_set() {
        let d = build_domain(&DomainConfig::ball(&Point::xy(0.0, 0.0), 1.0, 65)).unwrap();
        let cfg = OptConfig {
            control_points: 2,
            restarts: 0,
            ..OptConfig::default()
        };
        let level = grotzsch_capacity(0.3);
        let ls = mu_sphere(&d, &Point::xy(0.0, 0.0), level, &circle_directions(4, 0.0), 2, &cfg, 1e-3).unwrap();
        for s in &ls.samples {
            assert!((s.radius - 0.3).abs() < 0.05, "radius {}", s.radius);
        }
        let radii: Vec<f64> = ls.samples.iter().map(|s| s.radius).collect();
        assert!(roundness_ratio(&ls).unwrap() < 1.1, "{radii:?}");
        let too_high = mu_sphere(&d, &Point::xy(0.0, 0.0), 50.0, &circle_directions(2, 0.0), 2, &cfg, 1e-3);
        assert!(matches!(too_high, Err(Error::LevelEscapesSafeRegion)));
    }

    #[test]
    fn radial_profile_increases_and_rejects_far_samples() {
        let d = build_domain(&DomainConfig::ball(&Point::xy(0.0, 0.0), 1.0, 65)).unwrap();
        let cfg = OptConfig {
            control_points: 2,
            restarts: 0,
            ..OptConfig::default()
        };
        let x0 = Point::xy(0.0, 0.0);
        let e1 = Point::xy(1.0, 0.0);
        let p = radial_profile(&d, &x0, &e1, &[0.0, 0.2, 0.4, 0.6], 2, &cfg).unwrap();
        assert_eq!(p[0], 0.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]), "{p:?}");
        let q = radial_profile(&d, &x0, &Point::xy(0.0, 1.0), &[0.2, 0.4, 0.6], 2, &cfg).unwrap();
        for (a, b) in p[1..].iter().zip(&q) {
            assert!((a - b).abs() < 1e-9 * a);
        }
        assert!(radial_profile(&d, &x0, &e1, &[0.99], 2, &cfg).is_err());
    }
}
