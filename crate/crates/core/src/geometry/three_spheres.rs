//! Three-spheres construction.
//!
//! Given concentric spheres `S_1 = S(x0, R)` and `S_2 = S(x0, kR)` and points
//! `x1 in S_1`, `x2 in S_2`, build a sphere `S_3` such that `x1` and `x2` are
//! symmetric with respect to `S_3`, the closed ball of `S_3` contains `x0`
//! and `x2`, and `k/sqrt(1+k^2) R <= R_3 <= k/(1-k) R`.
//!
//! Everything is computed in normalized coordinates: `x0` at the origin,
//! `R = 1`, and the plane through `x0, x1, x2` carrying
//! `x1 = (-sqrt(1 - k^2 sin^2 t), k sin t)` and `x2 = (k cos t, k sin t)`.
//! The centre of `S_3` always lies on the horizontal line through `x1, x2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Point, Sphere};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `theta <= pi - arccot k`: the sphere passes through `x0`.
    OriginBranch,
    /// `theta >= pi - arccot k`: centre above `x0`, `R_3^2 = -k cos t sqrt(1 - k^2 sin^2 t)`.
    InteriorBranch,
    /// Interior branch whose radius would exceed `k/(1-k)`; the centre is
    /// slid along the line through `x1, x2` until `R_3 = k/(1-k)`.
    /// Only reachable for `k < (3 - sqrt 5)/2`.
    CappedInteriorBranch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeSpheresResult {
    pub sphere: Sphere,
    pub theta: f64,
    pub branch: Branch,
}

/// `pi - arccot k`, where the two branches meet.
pub fn branch_seam(k: f64) -> f64 {
    PI - (1.0 / k).atan()
}

/// Upper bound `k/(1-k)` on the normalized radius.
pub fn radius_upper_bound(k: f64) -> f64 {
    k / (1.0 - k)
}

/// Lower bound `k/sqrt(1+k^2)` on the normalized radius.
pub fn radius_lower_bound(k: f64) -> f64 {
    k / (1.0 + k * k).sqrt()
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Parameter(format!("k must lie in (0, 1), got {k}")));
    }
    Ok(())
}

/// Normalized centre abscissa and radius for the canonical configuration.
fn canonical(k: f64, theta: f64) -> (f64, f64, Branch) {
    let (s, c) = theta.sin_cos();
    let a = (1.0 - k * k * s * s).sqrt();
    let height2 = k * k * s * s;
    if theta <= branch_seam(k) {
        let lambda = k * k / (a - k * c) + k * c;
        (lambda, (lambda * lambda + height2).sqrt(), Branch::OriginBranch)
    } else {
        let r = (-k * c * a).max(0.0).sqrt();
        let cap = radius_upper_bound(k);
        if r <= cap {
            (0.0, r, Branch::InteriorBranch)
        } else {
            // (lambda + a)(lambda - k c) = cap^2, larger root
            let b = a - k * c;
            let lambda = 0.5 * (-b + (b * b + 4.0 * (cap * cap + k * c * a)).sqrt());
            (lambda, cap, Branch::CappedInteriorBranch)
        }
    }
}

/// Normalized radius `R_3 / R` as a function of `k` and `theta`.
pub fn three_spheres_radius(k: f64, theta: f64) -> Result<f64> {
    check_k(k)?;
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Parameter(format!(
            "theta must lie in [0, pi], got {theta}"
        )));
    }
    Ok(canonical(k, theta).1)
}

/// Build the third sphere for `x1` on `S(x0, R)` and `x2` on `S(x0, kR)`.
pub fn three_spheres(x1: &Point, x2: &Point, x0: &Point, r: f64, k: f64) -> Result<ThreeSpheresResult> {
    check_k(k)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("R must be positive, got {r}")));
    }
    let tol = 1e-9 * r;
    if (x1.dist(x0) - r).abs() > tol {
        return Err(Error::Geometry(format!(
            "|x1 - x0| = {} differs from R = {r}",
            x1.dist(x0)
        )));
    }
    if (x2.dist(x0) - k * r).abs() > tol {
        return Err(Error::Geometry(format!(
            "|x2 - x0| = {} differs from kR = {}",
            x2.dist(x0),
            k * r
        )));
    }

    let p1 = (*x1 - *x0) * (1.0 / r);
    let p2 = (*x2 - *x0) * (1.0 / r);
    let ex = (p2 - p1)
        .normalized()
        .ok_or_else(|| Error::Geometry("x1 and x2 coincide".into()))?;
    let along = p2.dot(&ex);
    let perp = p2 - ex * along;
    let height = perp.norm();
    let ey = if height > 1e-15 {
        perp * (1.0 / height)
    } else {
        any_perpendicular(&ex)
    };
    let theta = height.atan2(along).clamp(0.0, PI);
    let (lambda, radius, branch) = canonical(k, theta);
    let center = *x0 + (ex * lambda + ey * height) * r;
    Ok(ThreeSpheresResult {
        sphere: Sphere::new(center, radius * r)?,
        theta,
        branch,
    })
}

fn any_perpendicular(v: &Point) -> Point {
    let dim = v.dim();
    // pick the axis least aligned with v and orthogonalize
    let axis = (0..dim)
        .min_by(|&a, &b| v.get(a).abs().total_cmp(&v.get(b).abs()))
        .unwrap_or(0);
    let e = Point::unit(dim, axis);
    (e - *v * v.dot(&e)).normalized().unwrap_or(e)
}

/// Canonical points `x1, x2` of the normalized configuration for `(k, theta)`.
pub fn canonical_points(k: f64, theta: f64) -> (Point, Point) {
    let (s, c) = theta.sin_cos();
    let a = (1.0 - k * k * s * s).sqrt();
    (Point::xy(-a, k * s), Point::xy(k * c, k * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::invert_point;

    #[test]
    fn endpoint_values_for_half() {
        assert!((three_spheres_radius(0.5, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((three_spheres_radius(0.5, PI).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seam_value_matches_both_formulas() {
        for k in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let seam = branch_seam(k);
            let (s, c) = seam.sin_cos();
            let a = (1.0 - k * k * s * s).sqrt();
            let origin = ((k * k / (a - k * c) + k * c).powi(2) + k * k * s * s).sqrt();
            let interior = (-k * c * a).sqrt();
            let expected = radius_lower_bound(k);
            assert!((origin - expected).abs() < 1e-12, "k={k}");
            assert!((interior - expected).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn theta_zero_gives_upper_bound() {
        for k in [0.1, 0.25, 0.5, 0.9] {
            let r = three_spheres_radius(k, 0.0).unwrap();
            assert!((r - k / (1.0 - k)).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_engages_only_for_small_k() {
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        for k in [0.1, 0.2, 0.3] {
            assert!(k < golden);
            assert!(three_spheres_radius(k, PI).unwrap() <= radius_upper_bound(k) + 1e-15);
        }
        for k in [0.4, 0.5, 0.9] {
            let r = three_spheres_radius(k, PI).unwrap();
            assert!((r - k.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(three_spheres_radius(1.5, 0.1).is_err());
        assert!(three_spheres_radius(0.0, 0.1).is_err());
        assert!(three_spheres_radius(0.5, -0.1).is_err());
        let x0 = Point::xy(0.0, 0.0);
        let x1 = Point::xy(1.0, 0.0);
        let x2 = Point::xy(0.0, 0.3);
        assert!(matches!(
            three_spheres(&x1, &x2, &x0, 1.0, 0.5),
            Err(Error::Geometry(_))
        ));
        assert!(matches!(
            three_spheres(&x1, &x2, &x0, 1.0, 1.2),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn general_position_in_space() {
        let x0 = Point::xyz(1.0, -2.0, 0.5);
        let r = 3.0;
        let k = 0.4;
        let x1 = x0 + Point::xyz(1.0, 2.0, 2.0) * (r / 3.0);
        let x2 = x0 + Point::xyz(0.0, -1.0, 0.0) * (k * r);
        let res = three_spheres(&x1, &x2, &x0, r, k).unwrap();
        let img = invert_point(&x1, &res.sphere).unwrap();
        assert!(img.dist(&x2) <= 1e-9 * r);
        assert!(res.sphere.center.dist(&x0) <= res.sphere.radius * (1.0 + 1e-12));
        assert!(res.sphere.center.dist(&x2) <= res.sphere.radius * (1.0 + 1e-12));
    }

    #[test]
    fn recovers_theta_of_canonical_configuration() {
        let k = 0.6;
        for i in 0..=20 {
            let theta = PI * i as f64 / 20.0;
            let (x1, x2) = canonical_points(k, theta);
            let res = three_spheres(&x1, &x2, &Point::xy(0.0, 0.0), 1.0, k).unwrap();
            assert!((res.theta - theta).abs() < 1e-9, "theta {theta} vs {}", res.theta);
        }
    }
}
