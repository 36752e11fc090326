use super::{component_of, CellSet, CompactMask, GridDomain, GridSpec};
use crate::geometry::Point;
use crate::{Error, Result};

/// Face-connected run of cells crossed by the segment `[a, b]`.
///
/// Voxel traversal that steps one axis at a time, so that corner crossings
/// still produce face-adjacent cells. Both endpoints must lie in the box.
pub fn segment_walk(spec: &GridSpec, a: &Point, b: &Point) -> Option<Vec<usize>> {
    let start = spec.cell_of(a)?;
    let end = spec.cell_of(b)?;
    let dim = spec.dim();
    let ua = spec.grid_coords(a);
    let ub = spec.grid_coords(b);
    let mut ijk = spec.ijk(start);
    let target = spec.ijk(end);

    let mut step = [0i64; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for axis in 0..dim {
        let d = ub[axis] - ua[axis];
        if d > 0.0 {
            step[axis] = 1;
            t_max[axis] = (ua[axis].floor() + 1.0 - ua[axis]) / d;
            t_delta[axis] = 1.0 / d;
        } else if d < 0.0 {
            step[axis] = -1;
            t_max[axis] = (ua[axis] - ua[axis].floor()) / -d;
            t_delta[axis] = -1.0 / d;
        }
    }

    let budget: usize = (0..dim)
        .map(|a| (target[a] as i64 - ijk[a] as i64).unsigned_abs() as usize)
        .sum();
    let mut out = Vec::with_capacity(budget + 1);
    out.push(start);
    while ijk != target && out.len() <= budget {
        // advance along the axis whose boundary is crossed first, but never
        // past the target cell on that axis
        let axis = (0..dim)
            .filter(|&a| ijk[a] != target[a])
            .min_by(|&x, &y| t_max[x].total_cmp(&t_max[y]))?;
        ijk[axis] = (ijk[axis] as i64 + step[axis]) as usize;
        t_max[axis] += t_delta[axis];
        out.push(spec.index(ijk));
    }
    Some(out)
}

fn dist_to_segment(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = *b - *a;
    let len2 = ab.dot(&ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((*p - *a).dot(&ab) / len2).clamp(0.0, 1.0);
    p.dist(&(*a + ab * t))
}

/// Cells whose centres lie within `h/2 * sqrt(dim)` of the polyline,
/// restricted to the face-connected component of the traversed cells.
///
/// Fails when a vertex is outside `D` or when the curve crosses an outside cell.
pub fn rasterize_polyline(vertices: &[Point], domain: &GridDomain) -> Result<CompactMask> {
    let spec = domain.spec();
    if vertices.is_empty() {
        return Err(Error::Parameter("polyline needs at least one vertex".into()));
    }
    for v in vertices {
        if v.dim() != spec.dim() {
            return Err(Error::Parameter("polyline dimension does not match the grid".into()));
        }
        if !domain.contains_point(v) {
            return Err(Error::Domain(format!("vertex {:?} is outside D", v.coords())));
        }
    }

    let mut walk = Vec::new();
    let mut tube = Vec::new();
    let h = spec.h();
    let radius = 0.5 * h * (spec.dim() as f64).sqrt() * (1.0 + 1e-12);
    let pairs: Vec<(Point, Point)> = if vertices.len() == 1 {
        vec![(vertices[0], vertices[0])]
    } else {
        vertices.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in pairs {
        let cells = segment_walk(spec, &a, &b).ok_or(Error::CurveLeavesDomain)?;
        if cells.iter().any(|&c| !domain.is_inside(c)) {
            return Err(Error::CurveLeavesDomain);
        }
        walk.extend_from_slice(&cells);

        let ua = spec.grid_coords(&a);
        let ub = spec.grid_coords(&b);
        let n = spec.shape3();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for axis in 0..spec.dim() {
            let m = ua[axis].min(ub[axis]) - 1.5;
            let x = ua[axis].max(ub[axis]) + 1.5;
            lo[axis] = m.floor().max(0.0) as usize;
            hi[axis] = (x.ceil().max(0.0) as usize).min(n[axis] - 1);
        }
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let c = spec.index([i, j, k]);
                    if domain.is_inside(c) && dist_to_segment(&spec.center(c), &a, &b) <= radius {
                        tube.push(c);
                    }
                }
            }
        }
    }

    let all = CellSet::new(tube.into_iter().chain(walk.iter().copied()).collect());
    let component = component_of(&all, spec, walk[0]);
    CompactMask::new(domain, component)
}

/// Parse `"x,y;x,y;..."` (or with three coordinates) into points.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|chunk| {
            let coords = chunk
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad coordinate {c:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Point::new(&coords).map_err(|e| Error::Config(e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, is_connected, DomainConfig};

    fn disk(n: usize) -> GridDomain {
        build_domain(&DomainConfig::ball(&Point::xy(0.0, 0.0), 1.0, n)).unwrap()
    }

    #[test]
    fn degenerate_segment_is_one_cell() {
        let d = disk(33);
        let c = d.spec().cell_of(&Point::xy(0.1, 0.1)).unwrap();
        let p = d.spec().center(c);
        let q = p + Point::xy(1e-4 * d.h(), -1e-4 * d.h());
        let m = rasterize_polyline(&[p, q], &d).unwrap();
        assert_eq!(m.cells().as_slice(), &[c]);
    }

    #[test]
    fn axis_segment_is_straight_run() {
        let d = disk(65);
        let c = d.spec().cell_of(&Point::xy(-0.2, 0.05)).unwrap();
        let p = d.spec().center(c);
        let q = p + Point::xy(10.0 * d.h(), 0.0);
        let m = rasterize_polyline(&[p, q], &d).unwrap();
        assert_eq!(m.len(), 11);
        let row = d.spec().ijk(c)[1];
        assert!(m.cells().iter().all(|x| d.spec().ijk(x)[1] == row));
    }

    #[test]
    fn l_shape_contains_corner_and_is_connected() {
        let d = disk(65);
        let a = Point::xy(-0.5, -0.3);
        let corner = Point::xy(0.4, -0.3);
        let b = Point::xy(0.4, 0.5);
        let m = rasterize_polyline(&[a, corner, b], &d).unwrap();
        assert!(is_connected(m.cells(), d.spec()));
        for p in [a, corner, b] {
            assert!(m.cells().contains(d.spec().cell_of(&p).unwrap()));
        }
    }

    #[test]
    fn curve_leaving_domain_is_rejected() {
        let text = r#"{"dim": 2,
            "grid": {"origin": [-1.2, -1.2], "extent": [2.4, 2.4], "cells": [48, 48]},
            "shapes": [{"op": "union", "type": "box", "min": [-1, -1], "max": [1, 1]},
                       {"op": "difference", "type": "ball", "center": [0, 0], "radius": 0.4}]}"#;
        let d = build_domain(&DomainConfig::from_json(text).unwrap()).unwrap();
        let r = rasterize_polyline(&[Point::xy(-0.8, 0.0), Point::xy(0.8, 0.0)], &d);
        assert!(matches!(r, Err(Error::CurveLeavesDomain)));
        let r = rasterize_polyline(&[Point::xy(0.0, 0.0), Point::xy(0.8, 0.0)], &d);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn parses_point_lists() {
        let pts = parse_points("0,0; 0.5, -1e-3 ;").unwrap();
        assert_eq!(pts, vec![Point::xy(0.0, 0.0), Point::xy(0.5, -1e-3)]);
        assert!(parse_points("1,2,3,4").is_err());
        assert!(parse_points("1,x").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn rasterized_polylines_are_connected(
                pts in proptest::collection::vec((-0.65f64..0.65, -0.65f64..0.65), 2..6)
            ) {
                let d = disk(41);
                let verts: Vec<Point> = pts.iter().map(|&(x, y)| Point::xy(x, y)).collect();
                let m = rasterize_polyline(&verts, &d).unwrap();
                prop_assert!(is_connected(m.cells(), d.spec()));
                for v in &verts {
                    prop_assert!(m.cells().contains(d.spec().cell_of(v).unwrap()));
                }
            }
        }
    }
}
