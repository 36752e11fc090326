//! Damped Newton minimization of the regularized `p`-energy
//! `sum_cells (|g_c|^2 + delta)^(p/2)` with `delta = (eps h)^2`.

use super::linear::{dot, pcg, Mic, WeightedLaplacian};
use super::stencil::{Stencil, FIXED};
use super::SolverConfig;
use crate::{Error, Result};

const MIC_RELAX: f64 = 0.95;

/// Active cells with their difference pairs mapped to unknown numbers.
struct Pairs {
    cell: Vec<[(u32, u32); 3]>,
    unk: Vec<[(u32, u32); 3]>,
}

/// Second-order data of one cell: `g`, `p s^(p-2)` and `p (p-2) s^(p-4)`.
#[derive(Clone, Copy, Default)]
struct Curv {
    g: [f64; 3],
    c1: f64,
    c2: f64,
}

struct Problem<'a> {
    st: &'a Stencil,
    pairs: Pairs,
    p: f64,
    dim: usize,
}

impl Problem<'_> {
    fn diffs(&self, full: &[f64], k: usize) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (d, gd) in g.iter_mut().enumerate().take(self.dim) {
            let (lo, hi) = self.pairs.cell[k][d];
            *gd = full[hi as usize] - full[lo as usize];
        }
        g
    }

    fn energy(&self, full: &[f64], delta: f64) -> f64 {
        let half_p = 0.5 * self.p;
        (0..self.pairs.cell.len())
            .map(|k| {
                let g = self.diffs(full, k);
                (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + delta).powf(half_p)
            })
            .sum()
    }

    /// Energy, gradient with respect to the unknowns and the per-cell curvature data.
    fn derivatives(&self, full: &[f64], delta: f64, grad: &mut [f64], curv: &mut [Curv]) -> f64 {
        grad.iter_mut().for_each(|v| *v = 0.0);
        let p = self.p;
        let mut e = 0.0;
        for (k, cv) in curv.iter_mut().enumerate() {
            let g = self.diffs(full, k);
            let q = g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + delta;
            let s = q.sqrt();
            let sp2 = s.powf(p - 2.0);
            e += sp2 * q;
            let c1 = p * sp2;
            *cv = Curv {
                g,
                c1,
                c2: p * (p - 2.0) * sp2 / q,
            };
            for d in 0..self.dim {
                let (lo, hi) = self.pairs.unk[k][d];
                let flux = c1 * g[d];
                if hi != FIXED {
                    grad[hi as usize] += flux;
                }
                if lo != FIXED {
                    grad[lo as usize] -= flux;
                }
            }
        }
        e
    }

    fn hessian_apply(&self, curv: &[Curv], v: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|t| *t = 0.0);
        let at = |j: u32| if j == FIXED { 0.0 } else { v[j as usize] };
        for (k, cv) in curv.iter().enumerate() {
            let pairs = &self.pairs.unk[k];
            let mut dg = [0.0; 3];
            let mut gdg = 0.0;
            for d in 0..self.dim {
                let (lo, hi) = pairs[d];
                dg[d] = at(hi) - at(lo);
                gdg += cv.g[d] * dg[d];
            }
            for d in 0..self.dim {
                let t = cv.c1 * dg[d] + cv.c2 * gdg * cv.g[d];
                let (lo, hi) = pairs[d];
                if hi != FIXED {
                    y[hi as usize] += t;
                }
                if lo != FIXED {
                    y[lo as usize] -= t;
                }
            }
        }
    }

    /// Laplacian weighted by `p s^(p-2)`, the isotropic part of the Hessian.
    fn preconditioner(&self, curv: &[Curv], edge: &mut [Vec<f64>; 3]) -> (WeightedLaplacian, Mic) {
        for e in edge.iter_mut() {
            e.iter_mut().for_each(|v| *v = 0.0);
        }
        for (k, cv) in curv.iter().enumerate() {
            for d in 0..self.dim {
                let (lo, hi) = self.pairs.cell[k][d];
                if lo != hi {
                    edge[d][lo as usize] += cv.c1;
                }
            }
        }
        let a = WeightedLaplacian::assemble(self.st, edge);
        let mic = Mic::new(&a, MIC_RELAX);
        (a, mic)
    }
}

/// Minimizes over the free values of `full` in place. Returns the Newton
/// iteration count and the final relative energy decrease.
pub(super) fn minimize(st: &Stencil, full: &mut [f64], p: f64, cfg: &SolverConfig) -> Result<(usize, f64)> {
    let n = st.unknowns();
    if n == 0 {
        return Ok((0, 0.0));
    }
    let pairs = Pairs {
        cell: st.active.clone(),
        unk: st
            .active
            .iter()
            .map(|pr| pr.map(|(lo, hi)| (st.unknown_of_cell[lo as usize], st.unknown_of_cell[hi as usize])))
            .collect(),
    };
    let prob = Problem {
        st,
        pairs,
        p,
        dim: st.spec.dim(),
    };
    let h = st.spec.h();
    let len = st.spec.len();
    let mut edge: [Vec<f64>; 3] = std::array::from_fn(|d| if d < prob.dim { vec![0.0; len] } else { Vec::new() });
    let mut curv = vec![Curv::default(); prob.pairs.cell.len()];
    let mut grad = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut trial = full.to_vec();
    st.gather(full, &mut x);

    let mut eps = cfg.epsilon_reg.max(cfg.epsilon_min);
    let mut iterations = 0;
    let mut grad0: Option<f64> = None;
    let mut last_decrease = f64::INFINITY;
    loop {
        let last_level = eps <= cfg.epsilon_min;
        let level_tol = if last_level { cfg.tol } else { cfg.tol.sqrt() };
        let delta = (eps * h).powi(2);
        loop {
            if iterations >= cfg.max_iters {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: last_decrease,
                    energy: prob.energy(full, 0.0) * h.powf(prob.dim as f64 - p),
                });
            }
            iterations += 1;
            let e = prob.derivatives(full, delta, &mut grad, &mut curv);
            let gnorm = dot(&grad, &grad).sqrt();
            let g0 = *grad0.get_or_insert(gnorm);
            if gnorm == 0.0 {
                last_decrease = 0.0;
                break;
            }
            let forcing = (gnorm / g0).sqrt().min(0.1);
            let (a, mic) = prob.preconditioner(&curv, &mut edge);
            for (r, g) in rhs.iter_mut().zip(&grad) {
                *r = -g;
            }
            dir.iter_mut().for_each(|v| *v = 0.0);
            pcg(
                |v, y| prob.hessian_apply(&curv, v, y),
                |r, z| mic.solve(&a, r, z),
                &rhs,
                &mut dir,
                forcing,
                cfg.max_linear_iters,
            );
            let mut slope = dot(&grad, &dir);
            if !(slope < 0.0) {
                // fall back to the preconditioned steepest descent direction
                mic.solve(&a, &rhs, &mut dir);
                slope = dot(&grad, &dir);
            }

            let ls = &cfg.line_search;
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..ls.max_trials {
                trial.copy_from_slice(full);
                for (i, &c) in st.cells.iter().enumerate() {
                    trial[c] = x[i] + t * dir[i];
                }
                let et = prob.energy(&trial, delta);
                if et <= e + ls.armijo * t * slope {
                    accepted = Some(et);
                    break;
                }
                t *= ls.shrink;
            }
            let Some(e_new) = accepted else {
                // no representable decrease left along a descent direction
                if -slope <= level_tol * e {
                    last_decrease = -slope / e;
                    break;
                }
                return Err(Error::NoConvergence {
                    iterations,
                    residual: -slope / e,
                    energy: prob.energy(full, 0.0) * h.powf(prob.dim as f64 - p),
                });
            };
            for (xi, di) in x.iter_mut().zip(&dir) {
                *xi += t * di;
            }
            st.scatter(&x, full);
            last_decrease = (e - e_new) / e_new;
            if last_decrease < level_tol {
                break;
            }
        }
        if last_level {
            return Ok((iterations, last_decrease));
        }
        eps = (0.5 * eps).max(cfg.epsilon_min);
    }
}
