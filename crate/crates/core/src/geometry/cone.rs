//! Spherical cones used for the interior and exterior cone conditions.

use serde::{Deserialize, Serialize};

use super::Point;
use crate::{Error, Result};

/// Cone with vertex, unit axis, half opening angle and radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalCone {
    pub vertex: Point,
    pub axis: Point,
    pub half_angle: f64,
    pub radius: f64,
}

impl SphericalCone {
    pub fn new(vertex: Point, axis: Point, half_angle: f64, radius: f64) -> Result<Self> {
        if (axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter("cone axis must be a unit vector".into()));
        }
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Parameter(format!(
                "cone half angle must lie in (0, pi/2), got {half_angle}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!(
                "cone radius must be positive, got {radius}"
            )));
        }
        Ok(SphericalCone {
            vertex,
            axis,
            half_angle,
            radius,
        })
    }
}

/// Largest admissible opening `arctan(sqrt(R^2 - r^2) / r)` for a point at
/// distance `r` from a centre whose distance to the boundary is `R`.
pub fn cone_alpha0(r: f64, big_r: f64) -> Result<f64> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Parameter(format!(
            "need 0 < r < R, got r = {r}, R = {big_r}"
        )));
    }
    Ok(((big_r * big_r - r * r).sqrt() / r).atan())
}

/// Exterior and interior cone radii for opening `alpha`:
/// `R - r sec(alpha)` and `r (R cos(alpha) - r) / (R - r cos(alpha))`.
pub fn cone_radii(alpha: f64, r: f64, big_r: f64) -> Result<(f64, f64)> {
    let alpha0 = cone_alpha0(r, big_r)?;
    if !(0.0..alpha0).contains(&alpha) {
        return Err(Error::Parameter(format!(
            "alpha must lie in [0, {alpha0}), got {alpha}"
        )));
    }
    let c = alpha.cos();
    let rho_ext = big_r - r / c;
    let rho_int = r * (big_r * c - r) / (big_r - r * c);
    Ok((rho_ext, rho_int))
}

/// `0 < |y - vertex| <= radius` and the angle to the axis is at most the half angle.
pub fn cone_contains(cone: &SphericalCone, y: &Point) -> bool {
    let v = *y - cone.vertex;
    let d = v.norm();
    if d == 0.0 || d > cone.radius * (1.0 + 1e-12) {
        return false;
    }
    match v.angle_to(&cone.axis) {
        Some(angle) => angle <= cone.half_angle + 1e-12,
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn alpha0_values() {
        assert!((cone_alpha0(1.0 / 2f64.sqrt(), 1.0).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!((cone_alpha0(0.5, 1.0).unwrap() - FRAC_PI_3).abs() < 1e-14);
        assert!(cone_alpha0(1.0 - 1e-12, 1.0).unwrap() < 2e-6);
        assert!(cone_alpha0(1.0, 1.0).is_err());
        assert!(cone_alpha0(2.0, 1.0).is_err());
    }

    #[test]
    fn radii_values() {
        let (e, i) = cone_radii(0.0, 1.0, 3.0).unwrap();
        assert!((e - 2.0).abs() < 1e-15 && (i - 1.0).abs() < 1e-15);

        let (e, _) = cone_radii(FRAC_PI_6, 1.0, 2.0).unwrap();
        assert!((e - (2.0 - 2.0 / 3f64.sqrt())).abs() < 1e-14);

        // the interior radius closes up as cos(alpha) -> r / R
        let a0 = cone_alpha0(1.0, 2.0).unwrap();
        assert!((a0 - 0.5f64.acos()).abs() < 1e-14);
        let (_, i) = cone_radii(a0 - 1e-9, 1.0, 2.0).unwrap();
        assert!(i > 0.0 && i < 1e-8);

        assert!(cone_radii(a0, 1.0, 2.0).is_err());
    }

    #[test]
    fn containment() {
        let cone = SphericalCone::new(Point::xy(1.0, 1.0), Point::xy(0.0, 1.0), 0.3, 0.5).unwrap();
        assert!(cone_contains(&cone, &Point::xy(1.0, 1.5)));
        assert!(!cone_contains(&cone, &Point::xy(1.0, 1.0)));
        let w = Point::xy((0.31f64).sin(), (0.31f64).cos());
        assert!(!cone_contains(&cone, &(cone.vertex + w * 0.5)));
        let w = Point::xy((0.29f64).sin(), (0.29f64).cos());
        assert!(cone_contains(&cone, &(cone.vertex + w * 0.5)));
        assert!(!cone_contains(&cone, &Point::xy(1.0, 1.6)));
    }
}
