//! Forward-difference cell stencil shared by the energy, its derivatives
//! and the linear systems.
//!
//! Every cell owns one difference pair per axis: `(c, c + e_d)`, or the
//! backward pair `(c - e_d, c)` in the last layer of the box.

use crate::grid::{CellSet, GridDomain, GridSpec};

pub(crate) const FIXED: u32 = u32::MAX;

/// Difference pair `(lo, hi)` of cell `c` along `axis`, if the axis has two or more cells.
#[inline]
pub(crate) fn pair(spec: &GridSpec, ijk: [usize; 3], c: usize, axis: usize) -> Option<(usize, usize)> {
    let n = spec.shape3()[axis];
    if n < 2 {
        return None;
    }
    let s = spec.strides()[axis];
    Some(if ijk[axis] + 1 < n { (c, c + s) } else { (c - s, c) })
}

/// Calls `f(cell, pairs)` for every cell in index order, with absent axes as `(c, c)`.
pub(crate) fn for_each_cell(spec: &GridSpec, mut f: impl FnMut(usize, [(usize, usize); 3])) {
    let [n0, n1, n2] = spec.shape3();
    let mut c = 0;
    for k in 0..n2 {
        for j in 0..n1 {
            for i in 0..n0 {
                let ijk = [i, j, k];
                let mut pairs = [(c, c); 3];
                for (axis, slot) in pairs.iter_mut().enumerate().take(spec.dim()) {
                    if let Some(p) = pair(spec, ijk, c, axis) {
                        *slot = p;
                    }
                }
                f(c, pairs);
                c += 1;
            }
        }
    }
}

/// Free/fixed split of the box for a condenser `(D, K)`.
pub(crate) struct Stencil {
    pub spec: GridSpec,
    /// Unknown number of each cell, or [`FIXED`].
    pub unknown_of_cell: Vec<u32>,
    /// Cell of each unknown, increasing.
    pub cells: Vec<usize>,
    /// Difference pairs of the cells touching at least one unknown.
    pub active: Vec<[(u32, u32); 3]>,
}

impl Stencil {
    pub fn new(domain: &GridDomain, clamp: &CellSet) -> Self {
        let spec = domain.spec().clone();
        let mut unknown_of_cell = vec![FIXED; spec.len()];
        let mut cells = Vec::new();
        for (c, slot) in unknown_of_cell.iter_mut().enumerate() {
            if domain.is_inside(c) && !clamp.contains(c) {
                *slot = cells.len() as u32;
                cells.push(c);
            }
        }
        let mut active = Vec::new();
        for_each_cell(&spec, |_, pairs| {
            if pairs
                .iter()
                .any(|&(lo, hi)| lo != hi && (unknown_of_cell[lo] != FIXED || unknown_of_cell[hi] != FIXED))
            {
                active.push(pairs.map(|(lo, hi)| (lo as u32, hi as u32)));
            }
        });
        Stencil {
            spec,
            unknown_of_cell,
            cells,
            active,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.cells.len()
    }

    pub fn gather(&self, full: &[f64], compact: &mut [f64]) {
        for (x, &c) in compact.iter_mut().zip(&self.cells) {
            *x = full[c];
        }
    }

    pub fn scatter(&self, compact: &[f64], full: &mut [f64]) {
        for (&x, &c) in compact.iter().zip(&self.cells) {
            full[c] = x;
        }
    }
}
