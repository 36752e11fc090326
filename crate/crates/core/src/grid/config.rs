use serde::{Deserialize, Serialize};

use super::{GridDomain, GridSpec};
use crate::geometry::Point;
use crate::{Error, Result};

/// JSON description of a rasterized domain.
///
/// ```json
/// {"dim": 2,
///  "grid": {"origin": [-1.1, -1.1], "extent": [2.2, 2.2], "cells": [129, 129]},
///  "shapes": [{"op": "union", "type": "ball", "center": [0, 0], "radius": 1}]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dim: usize,
    pub grid: GridConfig,
    pub shapes: Vec<ShapeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: Vec<f64>,
    pub extent: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Union,
    Difference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Box { min: Vec<f64>, max: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub op: SetOp,
    #[serde(flatten)]
    pub shape: Shape,
}

impl ShapeSpec {
    pub fn ball(op: SetOp, center: &Point, radius: f64) -> Self {
        ShapeSpec {
            op,
            shape: Shape::Ball {
                center: center.coords().to_vec(),
                radius,
            },
        }
    }

    pub fn cuboid(op: SetOp, min: &[f64], max: &[f64]) -> Self {
        ShapeSpec {
            op,
            shape: Shape::Box {
                min: min.to_vec(),
                max: max.to_vec(),
            },
        }
    }
}

impl Shape {
    fn validate(&self, dim: usize) -> Result<()> {
        let finite = |v: &[f64]| v.len() == dim && v.iter().all(|x| x.is_finite());
        match self {
            Shape::Ball { center, radius } => {
                if !finite(center) || !radius.is_finite() || *radius < 0.0 {
                    return Err(Error::Config(format!(
                        "ball needs a {dim}-dimensional finite centre and a nonnegative radius"
                    )));
                }
            }
            Shape::Box { min, max } => {
                if !finite(min) || !finite(max) {
                    return Err(Error::Config(format!(
                        "box needs {dim}-dimensional finite corners"
                    )));
                }
            }
        }
        Ok(())
    }

    fn contains(&self, p: &Point) -> bool {
        match self {
            Shape::Ball { center, radius } => {
                let d2: f64 = center
                    .iter()
                    .enumerate()
                    .map(|(a, c)| (p.get(a) - c).powi(2))
                    .sum();
                d2 <= radius * radius
            }
            Shape::Box { min, max } => min
                .iter()
                .zip(max)
                .enumerate()
                .all(|(a, (lo, hi))| p.get(a) >= *lo && p.get(a) <= *hi),
        }
    }
}

/// Folds the shape list left to right starting from the empty set.
pub(crate) fn evaluate(shapes: &[ShapeSpec], p: &Point) -> bool {
    shapes.iter().fold(false, |acc, s| match s.op {
        SetOp::Union => acc || s.shape.contains(p),
        SetOp::Difference => acc && !s.shape.contains(p),
    })
}

impl DomainConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: DomainConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::Config(format!("dim must be 2 or 3, got {}", self.dim)));
        }
        for s in &self.shapes {
            s.shape.validate(self.dim)?;
        }
        self.grid_spec().map(|_| ())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        if self.grid.origin.len() != self.dim {
            return Err(Error::Config(format!(
                "grid origin must have {} entries",
                self.dim
            )));
        }
        let origin = Point::new(&self.grid.origin).map_err(|e| Error::Config(e.to_string()))?;
        GridSpec::new(origin, &self.grid.extent, &self.grid.cells)
    }

    /// Unit-style ball domain on a cube grid with a one-cell margin.
    pub fn ball(center: &Point, radius: f64, cells: usize) -> Self {
        let dim = center.dim();
        // margin of one cell on each side
        let half = radius * cells as f64 / (cells as f64 - 2.0);
        DomainConfig {
            dim,
            grid: GridConfig {
                origin: center.coords().iter().map(|c| c - half).collect(),
                extent: vec![2.0 * half; dim],
                cells: vec![cells; dim],
            },
            shapes: vec![ShapeSpec::ball(SetOp::Union, center, radius)],
        }
    }
}

/// Rasterize a domain configuration: a cell is inside iff its centre satisfies the shapes.
pub fn build_domain(config: &DomainConfig) -> Result<GridDomain> {
    config.validate()?;
    let spec = config.grid_spec()?;
    let inside = (0..spec.len())
        .map(|c| evaluate(&config.shapes, &spec.center(c)))
        .collect();
    GridDomain::from_mask(spec, inside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_area_matches_cell_count() {
        let cfg = DomainConfig::ball(&Point::xy(0.0, 0.0), 1.0, 129);
        let d = build_domain(&cfg).unwrap();
        let h = d.h();
        let expected = PI / (h * h);
        let rel = (d.inside_count() as f64 - expected).abs() / expected;
        assert!(rel < 0.02, "relative area error {rel}");
    }

    #[test]
    fn box_minus_ball_is_connected() {
        let text = r#"{"dim": 2,
            "grid": {"origin": [-1.2, -1.2], "extent": [2.4, 2.4], "cells": [48, 48]},
            "shapes": [{"op": "union", "type": "box", "min": [-1, -1], "max": [1, 1]},
                       {"op": "difference", "type": "ball", "center": [0, 0], "radius": 0.4}]}"#;
        let cfg = DomainConfig::from_json(text).unwrap();
        let d = build_domain(&cfg).unwrap();
        let centre = d.spec().cell_of(&Point::xy(0.01, 0.01)).unwrap();
        assert!(!d.is_inside(centre));
        assert!(d.contains_point(&Point::xy(0.7, 0.7)));
    }

    #[test]
    fn zero_radius_ball_is_empty() {
        let mut cfg = DomainConfig::ball(&Point::xy(0.0, 0.0), 1.0, 33);
        cfg.shapes = vec![ShapeSpec::ball(SetOp::Union, &Point::xy(0.013, 0.017), 0.0)];
        assert!(matches!(build_domain(&cfg), Err(Error::Domain(m)) if m.contains("empty")));
    }

    #[test]
    fn malformed_json_is_rejected() {
        assert!(DomainConfig::from_json("{").is_err());
        assert!(DomainConfig::from_json(r#"{"dim": 4, "grid": {"origin": [], "extent": [], "cells": []}, "shapes": []}"#).is_err());
        let bad_shape = r#"{"dim": 2, "grid": {"origin": [0,0], "extent": [1,1], "cells": [4,4]},
            "shapes": [{"op": "union", "type": "ball", "center": [0], "radius": 1}]}"#;
        assert!(DomainConfig::from_json(bad_shape).is_err());
    }
}
