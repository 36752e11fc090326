//! Closed-form sphere geometry in two and three dimensions.

mod cone;
mod three_spheres;

pub use cone::{cone_alpha0, cone_contains, cone_radii, SphericalCone};
pub use three_spheres::{
    branch_seam, canonical_points, radius_lower_bound, radius_upper_bound, three_spheres,
    three_spheres_radius, Branch, ThreeSpheresResult,
};

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Membership tolerance for "on the sphere" and "in the closed ball" tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A point (or vector) in R^2 or R^3.
///
/// Unused trailing coordinates of a planar point are kept at zero so that
/// arithmetic never needs to branch on the dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::Parameter(format!(
                "points must have 2 or 3 coordinates, got {dim}"
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("point coordinates must be finite".into()));
        }
        let mut c = [0.0; 3];
        c[..dim].copy_from_slice(coords);
        Ok(Point { coords: c, dim })
    }

    pub const fn xy(x: f64, y: f64) -> Self {
        Point {
            coords: [x, y, 0.0],
            dim: 2,
        }
    }

    pub const fn xyz(x: f64, y: f64, z: f64) -> Self {
        Point {
            coords: [x, y, z],
            dim: 3,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Point {
            coords: [0.0; 3],
            dim,
        }
    }

    /// The `axis`-th standard basis vector.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut p = Point::zero(dim);
        p.coords[axis] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn get(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Angle in `[0, pi]` between two nonzero vectors.
    pub fn angle_to(&self, other: &Point) -> Option<f64> {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return None;
        }
        Some((self.dot(other) / denom).clamp(-1.0, 1.0).acos())
    }
}

impl Add for Point {
    type Output = Point;
    fn add(mut self, rhs: Point) -> Point {
        for (a, b) in self.coords.iter_mut().zip(rhs.coords) {
            *a += b;
        }
        self.dim = self.dim.max(rhs.dim);
        self
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(mut self, rhs: Point) -> Point {
        for (a, b) in self.coords.iter_mut().zip(rhs.coords) {
            *a -= b;
        }
        self.dim = self.dim.max(rhs.dim);
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(mut self, rhs: f64) -> Point {
        for a in self.coords.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(&v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords().to_vec()
    }
}

/// The sphere `S(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Point,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Sphere { center, radius })
    }

    /// Closed-ball membership with relative tolerance [`MEMBERSHIP_TOL`].
    pub fn in_closed_ball(&self, x: &Point) -> bool {
        x.dist(&self.center) <= self.radius * (1.0 + MEMBERSHIP_TOL)
    }

    pub fn on_sphere(&self, x: &Point) -> bool {
        (x.dist(&self.center) - self.radius).abs() <= self.radius * MEMBERSHIP_TOL
    }
}

/// Reflection of `x` in the sphere `s`: `c + r^2 (x - c) / |x - c|^2`.
pub fn invert_point(x: &Point, s: &Sphere) -> Result<Point> {
    let v = *x - s.center;
    let d2 = v.dot(&v);
    if d2 == 0.0 {
        return Err(Error::CenterHasNoImage);
    }
    let image = s.center + v * (s.radius * s.radius / d2);
    if !image.is_finite() {
        return Err(Error::CenterHasNoImage);
    }
    Ok(image)
}

/// Polarization of a finite point set with respect to `s`:
/// `((E u E*) n B) u ((E n E*) \ B)` with `B` the closed ball of `s`.
///
/// Membership of a point in `E*` means its reflection coincides with a
/// point of `E` to within [`MEMBERSHIP_TOL`] (relative to the radius).
pub fn polarize_points(points: &[Point], s: &Sphere) -> Result<Vec<Point>> {
    let tol = s.radius * MEMBERSHIP_TOL;
    let contains = |set: &[Point], p: &Point| set.iter().any(|q| q.dist(p) <= tol);
    let images = points
        .iter()
        .map(|p| invert_point(p, s))
        .collect::<Result<Vec<_>>>()?;

    let mut out: Vec<Point> = Vec::new();
    let push = |p: Point, out: &mut Vec<Point>| {
        if !contains(out, &p) {
            out.push(p);
        }
    };
    for (p, image) in points.iter().zip(&images) {
        let in_ball = s.in_closed_ball(p);
        // p is in E; it is in E* iff its image is in E
        let in_reflection = contains(points, image);
        if in_ball || in_reflection {
            push(*p, &mut out);
        }
        // image is in E*; it is in E iff image is a point of E
        if s.in_closed_ball(image) {
            push(*image, &mut out);
        }
    }
    Ok(out)
}
