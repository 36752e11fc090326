//! Analytic reference values: the arithmetic-geometric mean, complete
//! elliptic integrals and the Grötzsch ring modulus.
//!
//! These are independent of the grid solvers and serve as oracles for them.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::Point;

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind with modulus `k` (not parameter).
pub fn ellip_k(k: f64) -> f64 {
    assert!((0.0..1.0).contains(&k), "modulus must lie in [0, 1)");
    PI / (2.0 * agm(1.0, (1.0 - k * k).sqrt()))
}

/// Grötzsch ring modulus `mu(r) = (pi/2) K(sqrt(1 - r^2)) / K(r)` for `0 < r < 1`.
pub fn grotzsch_modulus(r: f64) -> f64 {
    assert!(r > 0.0 && r < 1.0, "Grötzsch modulus needs 0 < r < 1");
    let rp = (1.0 - r * r).sqrt();
    // K(r') / K(r) = agm(1, r') / agm(1, r)
    FRAC_PI_2 * agm(1.0, rp) / agm(1.0, r)
}

/// Planar capacity of the Grötzsch ring `B(0,1) \ [0, r]`: `2 pi / mu(r)`.
pub fn grotzsch_capacity(r: f64) -> f64 {
    2.0 * PI / grotzsch_modulus(r)
}

/// Pseudo-hyperbolic distance `|x - y| / |1 - conj(x) y|` in the unit disk.
pub fn pseudo_hyperbolic(x: &Point, y: &Point) -> f64 {
    let (a, b) = (x.get(0), x.get(1));
    let (c, d) = (y.get(0), y.get(1));
    // conj(x) y = (a - ib)(c + id)
    let re = 1.0 - (a * c + b * d);
    let im = -(a * d - b * c);
    x.dist(y) / (re * re + im * im).sqrt()
}

/// Exact modulus metric of the unit disk, `2 pi / mu(pseudo_hyperbolic(x, y))`.
///
/// Conformal invariance carries the Grötzsch extremal case to arbitrary
/// pairs of points.
pub fn unit_disk_metric(x: &Point, y: &Point) -> f64 {
    let r = pseudo_hyperbolic(x, y);
    if r == 0.0 {
        0.0
    } else {
        grotzsch_capacity(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agm_known_value() {
        // Gauss's constant: 1 / agm(1, sqrt 2) = 0.8346268416740731...
        assert!((1.0 / agm(1.0, 2f64.sqrt()) - 0.834_626_841_674_073_2).abs() < 1e-15);
    }

    #[test]
    fn elliptic_k_against_quadrature() {
        for k in [0.0, 0.3, 0.5, 0.8, 0.95] {
            let n = 200_000;
            let h = FRAC_PI_2 / n as f64;
            let quad: f64 = (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    h / (1.0 - k * k * t.sin().powi(2)).sqrt()
                })
                .sum();
            assert!((ellip_k(k) - quad).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn grotzsch_symmetry_and_limits() {
        // mu(r) mu(r') = (pi/2)^2
        for r in [0.1, 0.3, 0.5, 0.9] {
            let rp = (1.0f64 - r * r).sqrt();
            assert!((grotzsch_modulus(r) * grotzsch_modulus(rp) - FRAC_PI_2.powi(2)).abs() < 1e-12);
        }
        // mu(r) ~ ln(4/r) as r -> 0
        let r = 1e-4;
        assert!((grotzsch_modulus(r) - (4.0f64 / r).ln()).abs() < 1e-6);
        // reference value for the half-radius ring
        assert!((grotzsch_capacity(0.5) - 3.126_803_845_392_223).abs() < 1e-12);
    }

    #[test]
    fn disk_metric_reduces_to_radial_case() {
        let v = unit_disk_metric(&Point::xy(0.0, 0.0), &Point::xy(0.5, 0.0));
        assert!((v - grotzsch_capacity(0.5)).abs() < 1e-14);
        let a = Point::xy(0.2, -0.1);
        let b = Point::xy(-0.3, 0.4);
        assert!((unit_disk_metric(&a, &b) - unit_disk_metric(&b, &a)).abs() < 1e-13);
    }
}
