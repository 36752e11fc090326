use super::{component_of, CellSet, CompactMask, GridDomain};
use crate::geometry::{invert_point, Point, Sphere};
use crate::{Error, Result};

/// Cell-centre polarization of a cell set.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizedSet {
    pub cells: CellSet,
    /// Sphere actually used (the centre may be nudged off cell faces).
    pub sphere: Sphere,
    /// Cells of the input outside the closed ball whose reflection left the grid.
    pub off_grid: usize,
}

/// Moves the centre by `1e-6 h` along each axis where it sits on a cell face.
fn nudge_center(domain: &GridDomain, s: &Sphere) -> Sphere {
    let spec = domain.spec();
    let u = spec.grid_coords(&s.center);
    let mut shift = [0.0; 3];
    for axis in 0..spec.dim() {
        if (u[axis] - u[axis].round()).abs() < 1e-9 {
            shift[axis] = 1e-6 * spec.h();
        }
    }
    let delta = Point::new(&shift[..spec.dim()]).expect("finite");
    Sphere {
        center: s.center + delta,
        radius: s.radius,
    }
}

/// Realizes `((E u E*) n B) u ((E n E*) \ B)` on cell centres, where a centre
/// belongs to `E*` iff its reflection falls in a cell of `E`.
///
/// The closed ball must lie in `D` (every cell centre in it is an inside cell).
pub fn polarize_mask(cells: &CellSet, s: &Sphere, domain: &GridDomain) -> Result<PolarizedSet> {
    let spec = domain.spec();
    let s = nudge_center(domain, s);
    let h = spec.h();

    // cells whose centre may lie in the closed ball
    let u = spec.grid_coords(&s.center);
    let n = spec.shape3();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for axis in 0..spec.dim() {
        let r = s.radius / h;
        let a = (u[axis] - r - 1.0).floor();
        let b = (u[axis] + r + 1.0).ceil();
        if a < 0.0 || b > n[axis] as f64 {
            return Err(Error::Geometry("polarization ball is not inside D".into()));
        }
        lo[axis] = a as usize;
        hi[axis] = (b as usize).min(n[axis] - 1);
    }

    let in_reflection = |c: usize| -> bool {
        let p = spec.center(c);
        match invert_point(&p, &s) {
            Ok(img) => spec.cell_of(&img).is_some_and(|ci| cells.contains(ci)),
            Err(_) => false,
        }
    };

    let mut out = Vec::new();
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                let c = spec.index([i, j, k]);
                if !s.in_closed_ball(&spec.center(c)) {
                    continue;
                }
                if !domain.is_inside(c) {
                    return Err(Error::Geometry("polarization ball is not inside D".into()));
                }
                if cells.contains(c) || in_reflection(c) {
                    out.push(c);
                }
            }
        }
    }

    let mut off_grid = 0;
    for c in cells.iter() {
        let p = spec.center(c);
        if s.in_closed_ball(&p) {
            continue;
        }
        let img = invert_point(&p, &s)?;
        if spec.cell_of(&img).is_none() {
            off_grid += 1;
        }
        if in_reflection(c) {
            out.push(c);
        }
    }

    Ok(PolarizedSet {
        cells: CellSet::new(out),
        sphere: s,
        off_grid,
    })
}

/// Face-connected component of `polarized n B` containing `anchor`.
pub fn restrict_polarized(
    polarized: &CellSet,
    s: &Sphere,
    anchor: &Point,
    domain: &GridDomain,
) -> Result<CompactMask> {
    let spec = domain.spec();
    let restricted: CellSet = polarized
        .iter()
        .filter(|&c| s.in_closed_ball(&spec.center(c)))
        .collect();
    let start = spec
        .cell_of(anchor)
        .filter(|&c| restricted.contains(c))
        .ok_or_else(|| Error::Geometry("anchor is not in the restricted polarized set".into()))?;
    CompactMask::new(domain, component_of(&restricted, spec, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, is_connected, rasterize_polyline, DomainConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square_domain(n: usize) -> GridDomain {
        let text = format!(
            r#"{{"dim": 2, "grid": {{"origin": [-1.0, -1.0], "extent": [2.0, 2.0], "cells": [{n}, {n}]}},
               "shapes": [{{"op": "union", "type": "box", "min": [-0.95, -0.95], "max": [0.95, 0.95]}}]}}"#
        );
        build_domain(&DomainConfig::from_json(&text).unwrap()).unwrap()
    }

    #[test]
    fn symmetric_mask_inside_ball_is_fixed() {
        let d = square_domain(40);
        let spec = d.spec();
        // centre on a cell centre: the one-cell set {centre} is its own reflection's cell
        let c = spec.cell_of(&Point::xy(0.01, 0.01)).unwrap();
        let s = Sphere::new(spec.center(c) + Point::xy(1e-3, 1e-3), 0.3).unwrap();
        let mask: CellSet = (0..spec.len())
            .filter(|&x| spec.center(x).dist(&s.center) <= 0.3 && spec.center(x).dist(&s.center) >= 0.25)
            .collect();
        let p = polarize_mask(&mask, &s, &d).unwrap();
        assert_eq!(p.cells, mask);
    }

    #[test]
    fn outside_cell_moves_to_its_reflection() {
        let d = square_domain(40);
        let spec = d.spec();
        let h = d.h();
        let x0 = spec.center(spec.cell_of(&Point::xy(0.01, 0.01)).unwrap());
        // |c - x0| = 8h and |t - x0| = 2h are mutual images for r = 4h
        let s = Sphere::new(x0, 4.0 * h).unwrap();
        let c = spec.cell_of(&(x0 + Point::xy(8.0 * h, 0.0))).unwrap();
        let t = spec.cell_of(&(x0 + Point::xy(2.0 * h, 0.0))).unwrap();
        let p = polarize_mask(&CellSet::new(vec![c]), &s, &d).unwrap();
        assert_eq!(p.cells.as_slice(), &[t]);
        assert_eq!(p.off_grid, 0);
    }

    #[test]
    fn ball_must_lie_in_domain() {
        let d = square_domain(40);
        let s = Sphere::new(Point::xy(0.7, 0.0), 0.4).unwrap();
        let c = d.spec().cell_of(&Point::xy(0.0, 0.0)).unwrap();
        assert!(polarize_mask(&CellSet::new(vec![c]), &s, &d).is_err());
    }

    #[test]
    fn polarization_is_idempotent_on_random_masks() {
        let d = square_domain(48);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let verts: Vec<Point> = (0..3)
                .map(|_| Point::xy(rng.gen_range(-0.85..0.85), rng.gen_range(-0.85..0.85)))
                .collect();
            let mask = rasterize_polyline(&verts, &d).unwrap();
            let s = Sphere::new(
                Point::xy(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)),
                rng.gen_range(0.2..0.5),
            )
            .unwrap();
            let once = polarize_mask(mask.cells(), &s, &d).unwrap();
            let twice = polarize_mask(&once.cells, &once.sphere, &d).unwrap();
            assert_eq!(once.cells, twice.cells);
        }
    }

    #[test]
    fn restriction_keeps_anchor_component() {
        let d = square_domain(40);
        let spec = d.spec();
        let s = Sphere::new(Point::xy(0.013, 0.011), 0.5).unwrap();
        // dumbbell: two blobs inside the ball joined by a bar that leaves it
        let mask: CellSet = (0..spec.len())
            .filter(|&c| {
                let p = spec.center(c);
                p.dist(&Point::xy(-0.3, 0.0)) < 0.1
                    || p.dist(&Point::xy(0.3, 0.0)) < 0.1
                    || (p.get(1) > 0.55 && p.get(1) < 0.65 && p.get(0).abs() < 0.35)
                    || (p.get(0).abs() > 0.25 && p.get(0).abs() < 0.35 && p.get(1) > 0.0 && p.get(1) < 0.65)
            })
            .collect();
        assert!(is_connected(&mask, spec));
        let r = restrict_polarized(&mask, &s, &Point::xy(-0.3, 0.0), &d).unwrap();
        assert!(r.cells().contains(spec.cell_of(&Point::xy(-0.3, 0.0)).unwrap()));
        assert!(!r.cells().contains(spec.cell_of(&Point::xy(0.3, 0.0)).unwrap()));
        assert!(restrict_polarized(&mask, &s, &Point::xy(0.0, 0.9), &d).is_err());
    }
}
