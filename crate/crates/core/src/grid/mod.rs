//! Rasterized domains, compact cell sets and the operations acting on them.
//!
//! Every set is realized by cell-centre sampling on a uniform grid. Cells
//! are addressed by their linear index `i + n0 * (j + n1 * k)`.

mod config;
mod polarize;
mod raster;
mod rle;

pub use config::{build_domain, DomainConfig, GridConfig, SetOp, Shape, ShapeSpec};
pub use polarize::{polarize_mask, restrict_polarized, PolarizedSet};
pub use raster::{parse_points, rasterize_polyline, segment_walk};
pub use rle::{parse_rle_csv, to_rle_csv};

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::{Error, Result};

/// Largest number of cells a grid may have.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 25;

/// Uniform axis-aligned grid over a bounding box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    origin: Point,
    cells: [usize; 3],
    h: f64,
}

impl GridSpec {
    pub fn new(origin: Point, extent: &[f64], cells: &[usize]) -> Result<Self> {
        Self::with_budget(origin, extent, cells, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(origin: Point, extent: &[f64], cells: &[usize], budget: usize) -> Result<Self> {
        let dim = origin.dim();
        if extent.len() != dim || cells.len() != dim {
            return Err(Error::Config(format!(
                "grid origin, extent and cells must all have {dim} entries"
            )));
        }
        if cells.iter().any(|&c| c == 0) {
            return Err(Error::Config("cells per axis must be positive".into()));
        }
        if extent.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::Config("grid extent must be positive".into()));
        }
        let total = cells
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .filter(|&t| t <= budget)
            .ok_or_else(|| Error::Config(format!("grid exceeds the cell budget of {budget}")))?;
        debug_assert!(total > 0);
        let h = extent[0] / cells[0] as f64;
        for axis in 1..dim {
            let ha = extent[axis] / cells[axis] as f64;
            if (ha - h).abs() > 1e-12 * h {
                return Err(Error::Config(format!(
                    "grid spacing must be uniform: axis 0 has {h}, axis {axis} has {ha}"
                )));
            }
        }
        let mut c = [1usize; 3];
        c[..dim].copy_from_slice(cells);
        Ok(GridSpec {
            dim,
            origin,
            cells: c,
            h,
        })
    }

    /// Cube `[center - half, center + half]^dim` with `n` cells per axis.
    pub fn cube(center: Point, half_width: f64, n: usize) -> Result<Self> {
        let dim = center.dim();
        let origin = center - Point::new(&vec![half_width; dim])?;
        Self::new(origin, &vec![2.0 * half_width; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    /// Cells per axis padded with ones to length three.
    pub fn shape3(&self) -> [usize; 3] {
        self.cells
    }

    pub fn extent(&self) -> Vec<f64> {
        self.cells().iter().map(|&n| n as f64 * self.h).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> [usize; 3] {
        [1, self.cells[0], self.cells[0] * self.cells[1]]
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.cells[0] * (ijk[1] + self.cells[1] * ijk[2])
    }

    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.cells[0];
        let rest = idx / self.cells[0];
        [i, rest % self.cells[1], rest / self.cells[1]]
    }

    pub fn center(&self, idx: usize) -> Point {
        let ijk = self.ijk(idx);
        let mut c = [0.0; 3];
        for (axis, slot) in c.iter_mut().enumerate().take(self.dim) {
            *slot = self.origin.get(axis) + (ijk[axis] as f64 + 0.5) * self.h;
        }
        Point::new(&c[..self.dim]).expect("cell centres are finite")
    }

    /// Continuous cell coordinates of a point (cell `i` spans `[i, i+1)`).
    pub fn grid_coords(&self, p: &Point) -> [f64; 3] {
        let mut u = [0.0; 3];
        for (axis, slot) in u.iter_mut().enumerate().take(self.dim) {
            *slot = (p.get(axis) - self.origin.get(axis)) / self.h;
        }
        u
    }

    /// Cell containing `p`, if `p` lies in the bounding box.
    pub fn cell_of(&self, p: &Point) -> Option<usize> {
        let u = self.grid_coords(p);
        let mut ijk = [0usize; 3];
        for axis in 0..self.dim {
            let f = u[axis].floor();
            if !(f >= 0.0 && f < self.cells[axis] as f64) {
                return None;
            }
            ijk[axis] = f as usize;
        }
        Some(self.index(ijk))
    }

    /// Face neighbours of a cell, in axis order (minus side first).
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let ijk = self.ijk(idx);
        let strides = self.strides();
        (0..self.dim).flat_map(move |axis| {
            let lo = (ijk[axis] > 0).then(|| idx - strides[axis]);
            let hi = (ijk[axis] + 1 < self.cells[axis]).then(|| idx + strides[axis]);
            lo.into_iter().chain(hi)
        })
    }

    pub fn on_box_boundary(&self, idx: usize) -> bool {
        let ijk = self.ijk(idx);
        (0..self.dim).any(|a| ijk[a] == 0 || ijk[a] + 1 == self.cells[a])
    }
}

/// Sorted set of distinct cell indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellSet(Vec<usize>);

impl CellSet {
    pub fn new(mut cells: Vec<usize>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        CellSet(cells)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0.binary_search(&idx).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        CellSet::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.0.iter().all(|&c| other.contains(c))
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for CellSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        CellSet::new(iter.into_iter().collect())
    }
}

/// Face-adjacency connectivity of a cell set (breadth-first reachability).
pub fn is_connected(cells: &CellSet, spec: &GridSpec) -> bool {
    match cells.as_slice().first() {
        None => true,
        Some(&start) => component_of(cells, spec, start).len() == cells.len(),
    }
}

/// Face-connected component of `cells` containing `start`.
pub fn component_of(cells: &CellSet, spec: &GridSpec, start: usize) -> CellSet {
    if !cells.contains(start) {
        return CellSet::default();
    }
    let mut seen = vec![false; cells.len()];
    let pos = |c: usize| cells.as_slice().binary_search(&c).ok();
    let mut queue = VecDeque::from([start]);
    seen[pos(start).expect("start in set")] = true;
    let mut out = vec![start];
    while let Some(c) = queue.pop_front() {
        for n in spec.neighbors(c) {
            if let Some(p) = pos(n) {
                if !seen[p] {
                    seen[p] = true;
                    out.push(n);
                    queue.push_back(n);
                }
            }
        }
    }
    CellSet::new(out)
}

/// Rasterized bounded domain: the cells of the bounding box whose centres lie in `D`.
///
/// Cloning is cheap; the cell mask is shared.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDomain {
    spec: GridSpec,
    inside: Arc<[bool]>,
    inside_count: usize,
}

impl GridDomain {
    /// Validates nonemptiness, a nonempty outside layer touching the box
    /// boundary, and face-connectedness of the inside region.
    pub fn from_mask(spec: GridSpec, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != spec.len() {
            return Err(Error::Domain("mask size does not match grid".into()));
        }
        let inside_count = inside.iter().filter(|&&b| b).count();
        if inside_count == 0 {
            return Err(Error::Domain("domain is empty".into()));
        }
        let touches_box = (0..spec.len()).any(|c| !inside[c] && spec.on_box_boundary(c));
        if !touches_box {
            return Err(Error::Domain(
                "domain must leave an outside layer touching the bounding box".into(),
            ));
        }
        let domain = GridDomain {
            spec,
            inside: inside.into(),
            inside_count,
        };
        let start = domain.inside.iter().position(|&b| b).expect("nonempty");
        if domain.flood(start).iter().filter(|&&b| b).count() != inside_count {
            return Err(Error::Domain("domain not connected".into()));
        }
        Ok(domain)
    }

    fn flood(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.spec.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for n in self.spec.neighbors(c) {
                if self.inside[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn inside_count(&self) -> usize {
        self.inside_count
    }

    /// Inside cell containing `p`, if any.
    pub fn inside_cell(&self, p: &Point) -> Option<usize> {
        self.spec.cell_of(p).filter(|&c| self.inside[c])
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.inside_cell(p).is_some()
    }

    /// Distance from `p` to the nearest outside cell centre, less half a cell.
    ///
    /// This is the grid surrogate of `dist(p, boundary of D)`.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        let nearest = (0..self.spec.len())
            .filter(|&c| !self.inside[c])
            .map(|c| self.spec.center(c).dist(p))
            .fold(f64::INFINITY, f64::min);
        (nearest - 0.5 * self.spec.h).max(0.0)
    }

    /// Shortest face-connected path of inside cells between two cells.
    pub fn inside_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        if !self.inside[from] || !self.inside[to] {
            return None;
        }
        let mut parent = vec![usize::MAX; self.spec.len()];
        parent[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            if c == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for n in self.spec.neighbors(c) {
                if self.inside[n] && parent[n] == usize::MAX {
                    parent[n] = c;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

/// Nonempty face-connected set of inside cells: the grid form of a continuum `K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompactMask {
    cells: CellSet,
}

impl CompactMask {
    pub fn new(domain: &GridDomain, cells: CellSet) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Domain("compact set is empty".into()));
        }
        if let Some(c) = cells.iter().find(|&c| c >= domain.spec.len() || !domain.inside[c]) {
            return Err(Error::Domain(format!("cell {c} of the compact set is not inside D")));
        }
        if !is_connected(&cells, &domain.spec) {
            return Err(Error::Domain("compact set is not connected".into()));
        }
        Ok(CompactMask { cells })
    }

    /// Inside cells whose centres satisfy the shape predicate, required connected.
    pub fn from_shapes(domain: &GridDomain, shapes: &[ShapeSpec]) -> Result<Self> {
        let cells = (0..domain.spec.len())
            .filter(|&c| domain.inside[c] && config::evaluate(shapes, &domain.spec.center(c)))
            .collect();
        Self::new(domain, cells)
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}
