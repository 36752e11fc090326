//! Weighted graph Laplacians on the cell grid, a modified incomplete
//! Cholesky preconditioner and preconditioned conjugate gradients.

use super::stencil::{Stencil, FIXED};

/// `sum_e w_e (x_lo - x_hi)^2` restricted to the unknowns, with the
/// couplings to fixed cells moved to the right-hand side.
pub(crate) struct WeightedLaplacian {
    pub diag: Vec<f64>,
    /// Slot `2d` is the lower neighbour along axis `d`, slot `2d + 1` the upper one.
    pub nb: Vec<[u32; 6]>,
    pub wt: Vec<[f64; 6]>,
}

impl WeightedLaplacian {
    /// `edge[d][lo]` is the weight of the pair `(lo, lo + e_d)`.
    pub fn assemble(st: &Stencil, edge: &[Vec<f64>; 3]) -> Self {
        let spec = &st.spec;
        let n = st.unknowns();
        let strides = spec.strides();
        let shape = spec.shape3();
        let mut diag = vec![0.0; n];
        let mut nb = vec![[FIXED; 6]; n];
        let mut wt = vec![[0.0; 6]; n];
        for (i, &c) in st.cells.iter().enumerate() {
            let ijk = spec.ijk(c);
            for axis in 0..spec.dim() {
                let s = strides[axis];
                if ijk[axis] > 0 {
                    let w = edge[axis][c - s];
                    diag[i] += w;
                    wt[i][2 * axis] = w;
                    nb[i][2 * axis] = st.unknown_of_cell[c - s];
                }
                if ijk[axis] + 1 < shape[axis] {
                    let w = edge[axis][c];
                    diag[i] += w;
                    wt[i][2 * axis + 1] = w;
                    nb[i][2 * axis + 1] = st.unknown_of_cell[c + s];
                }
            }
        }
        WeightedLaplacian { diag, nb, wt }
    }

    /// Right-hand side from the fixed values of `full`.
    pub fn rhs(&self, st: &Stencil, edge: &[Vec<f64>; 3], full: &[f64]) -> Vec<f64> {
        let spec = &st.spec;
        let strides = spec.strides();
        let shape = spec.shape3();
        st.cells
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let ijk = spec.ijk(c);
                let mut b = 0.0;
                for axis in 0..spec.dim() {
                    let s = strides[axis];
                    if ijk[axis] > 0 && self.nb[i][2 * axis] == FIXED {
                        b += edge[axis][c - s] * full[c - s];
                    }
                    if ijk[axis] + 1 < shape[axis] && self.nb[i][2 * axis + 1] == FIXED {
                        b += edge[axis][c] * full[c + s];
                    }
                }
                b
            })
            .collect()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..x.len() {
            let mut acc = self.diag[i] * x[i];
            for slot in 0..6 {
                let j = self.nb[i][slot];
                if j != FIXED {
                    acc -= self.wt[i][slot] * x[j as usize];
                }
            }
            y[i] = acc;
        }
    }
}

/// MIC(0) factor `M = (D + L) D^{-1} (D + L^T)` of a weighted Laplacian.
pub(crate) struct Mic {
    pivots: Vec<f64>,
}

impl Mic {
    pub fn new(a: &WeightedLaplacian, relax: f64) -> Self {
        let n = a.diag.len();
        let mut pivots = vec![0.0; n];
        for i in 0..n {
            let mut d = a.diag[i];
            for axis in 0..3 {
                let j = a.nb[i][2 * axis];
                if j == FIXED {
                    continue;
                }
                let j = j as usize;
                let w = a.wt[i][2 * axis];
                // fill produced by eliminating j, dropped and lumped onto the diagonal
                let mut other = 0.0;
                for axis2 in 0..3 {
                    if axis2 != axis && a.nb[j][2 * axis2 + 1] != FIXED {
                        other += a.wt[j][2 * axis2 + 1];
                    }
                }
                d -= w * (w + relax * other) / pivots[j];
            }
            // safeguard against loss of positivity
            pivots[i] = if d > 1e-3 * a.diag[i] { d } else { a.diag[i] };
        }
        Mic { pivots }
    }

    pub fn solve(&self, a: &WeightedLaplacian, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        for i in 0..n {
            let mut acc = r[i];
            for axis in 0..3 {
                let j = a.nb[i][2 * axis];
                if j != FIXED {
                    acc += a.wt[i][2 * axis] * z[j as usize];
                }
            }
            z[i] = acc / self.pivots[i];
        }
        for i in (0..n).rev() {
            let mut acc = 0.0;
            for axis in 0..3 {
                let k = a.nb[i][2 * axis + 1];
                if k != FIXED {
                    acc += a.wt[i][2 * axis + 1] * z[k as usize];
                }
            }
            z[i] += acc / self.pivots[i];
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) struct PcgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Preconditioned conjugate gradients from the initial guess in `x`.
/// Stops when `|b - A x| <= tol |b|`.
pub(crate) fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    precondition: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> PcgOutcome {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return PcgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut rnorm = dot(&r, &r).sqrt();
    if rnorm <= tol * bnorm {
        return PcgOutcome {
            iterations: 0,
            relative_residual: rnorm / bnorm,
            converged: true,
        };
    }
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            return PcgOutcome {
                iterations: it,
                relative_residual: rnorm / bnorm,
                converged: false,
            };
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            return PcgOutcome {
                iterations: it,
                relative_residual: rnorm / bnorm,
                converged: true,
            };
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    PcgOutcome {
        iterations: max_iter,
        relative_residual: rnorm / bnorm,
        converged: false,
    }
}
