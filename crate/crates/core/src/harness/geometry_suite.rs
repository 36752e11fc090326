//! Exact-geometry suite for the three-spheres construction.

use std::f64::consts::PI;

use serde_json::json;

use super::{CaseRecord, SuiteConfig, SuiteReport};
use crate::geometry::{
    branch_seam, canonical_points, invert_point, radius_lower_bound, radius_upper_bound, three_spheres,
    three_spheres_radius, Point,
};
use crate::Result;

const KS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Radius on the branch through `x0`, written out independently of the library.
fn origin_formula(k: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let a = (1.0 - k * k * s * s).sqrt();
    ((k * k / (a - k * c) + k * c).powi(2) + k * k * s * s).sqrt()
}

fn interior_formula(k: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (-k * c * (1.0 - k * k * s * s).sqrt()).max(0.0).sqrt()
}

/// `d R / d theta` on the branch through `x0`.
fn origin_slope(k: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let a = (1.0 - k * k * s * s).sqrt();
    -2.0 * k.powi(3) * s / (a * (a - k * c).powi(2)) / (2.0 * origin_formula(k, t))
}

/// Place the canonical configuration at `x0` with radius `big_r`, rotated by `beta`,
/// in the plane or tilted into space.
fn place(k: f64, t: f64, x0: &Point, big_r: f64, beta: f64, spatial: bool) -> (Point, Point) {
    let (p1, p2) = canonical_points(k, t);
    let (sb, cb) = beta.sin_cos();
    let map = |p: Point| {
        let (u, v) = (p.get(0), p.get(1));
        let (x, y) = (cb * u - sb * v, sb * u + cb * v);
        if spatial {
            // plane spanned by (1, 0, 0) and (0, 0.6, 0.8)
            *x0 + Point::xyz(x, 0.6 * y, 0.8 * y) * big_r
        } else {
            *x0 + Point::xy(x, y) * big_r
        }
    };
    (map(p1), map(p2))
}

/// Symmetry, containment, radius bounds, seam continuity, endpoint values and
/// monotonicity of the three-spheres radius on a `(k, theta)` grid.
pub fn verify_three_spheres(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tol = cfg.slack;
    let mut rep = SuiteReport::new("three-spheres", tol);
    let m = cfg.cases.max(2);
    let thetas: Vec<f64> = (0..m).map(|j| PI * j as f64 / (m - 1) as f64).collect();
    for (ki, &k) in KS.iter().enumerate() {
        let case = ki;
        let lo = radius_lower_bound(k);
        let hi = radius_upper_bound(k);
        let seam = branch_seam(k);
        let spatial = ki % 2 == 1;
        let x0 = if spatial { Point::xyz(0.3, -0.2, 1.1) } else { Point::xy(0.3, -0.2) };
        let big_r = 1.7;

        for (j, &t) in thetas.iter().enumerate() {
            let beta = 0.37 * j as f64;
            let (x1, x2) = place(k, t, &x0, big_r, beta, spatial);
            let inputs = json!({"k": k, "theta": t, "x0": x0, "R": big_r, "x1": x1, "x2": x2});
            let res = three_spheres(&x1, &x2, &x0, big_r, k)?;
            let s = res.sphere;
            let image = invert_point(&x1, &s)?;
            rep.push(CaseRecord::close_abs(case, "symmetry", inputs.clone(), image.dist(&x2) / big_r, 0.0, tol));
            rep.push(CaseRecord::at_most(case, "contains_x0", inputs.clone(), s.center.dist(&x0), s.radius, tol));
            rep.push(CaseRecord::at_most(case, "contains_x2", inputs.clone(), s.center.dist(&x2), s.radius, tol));
            rep.push(CaseRecord::at_least(case, "lower_bound", inputs.clone(), s.radius, lo * big_r, tol));
            rep.push(CaseRecord::at_most(case, "upper_bound", inputs.clone(), s.radius, hi * big_r, tol));
            rep.push(CaseRecord::close_abs(case, "theta_recovery", inputs.clone(), res.theta, t, tol));
            if t <= PI / 2.0 {
                let remark = k / (1.0 - k * k).sqrt();
                rep.push(CaseRecord::at_least(case, "band_lower_bound", inputs.clone(), s.radius, remark * big_r, tol));
            }
            // strict decrease on the branch through x0, increase beyond the seam
            if let Some(&next) = thetas.get(j + 1) {
                let r0 = three_spheres_radius(k, t)?;
                let r1 = three_spheres_radius(k, next)?;
                let step = json!({"k": k, "theta": t, "next": next});
                if next <= seam {
                    rep.push(CaseRecord::strictly_below(case, "decreasing_to_seam", step, r1, r0));
                } else if t >= seam && r1 < hi {
                    rep.push(CaseRecord::strictly_below(case, "increasing_after_seam", step, r0, r1));
                }
            }
            if t > 0.0 && t < seam {
                let d = 1e-6;
                let (a, b) = ((t - d).max(0.0), (t + d).min(seam));
                let fd = (three_spheres_radius(k, b)? - three_spheres_radius(k, a)?) / (b - a);
                let exact = origin_slope(k, t);
                let slope_in = json!({"k": k, "theta": t});
                rep.push(CaseRecord::strictly_below(case, "slope_negative", slope_in.clone(), fd, 0.0));
                rep.push(CaseRecord::close(case, "slope_formula", slope_in, fd, exact, 1e-5));
            }
        }

        let ends = json!({"k": k});
        rep.push(CaseRecord::close_abs(case, "endpoint_theta0", ends.clone(), three_spheres_radius(k, 0.0)?, hi, 1e-10));
        rep.push(CaseRecord::close_abs(case, "endpoint_seam", ends.clone(), three_spheres_radius(k, seam)?, lo, 1e-10));
        rep.push(CaseRecord::close_abs(
            case,
            "seam_continuity",
            ends.clone(),
            origin_formula(k, seam),
            interior_formula(k, seam),
            1e-10,
        ));
        let eps = 1e-9;
        rep.push(CaseRecord::close_abs(
            case,
            "seam_one_sided",
            ends.clone(),
            three_spheres_radius(k, seam - eps)?,
            three_spheres_radius(k, seam + eps)?,
            1e-7,
        ));
        let at_pi = three_spheres_radius(k, PI)?;
        rep.push(CaseRecord::close_abs(case, "endpoint_pi", ends, at_pi, k.sqrt().min(hi), 1e-10));
    }
    Ok(rep)
}
