//! Conformal capacity `cap(D, K)` by minimizing the discrete `n`-energy
//! over grid potentials clamped to 1 on `K` and 0 outside `D`.
//!
//! The cell gradient is the forward difference along every axis (backward
//! in the last layer of the box), so the energy is
//! `sum_cells |g_c|^p h^(dim - p)` with `g_c` the vector of differences.
//! For `p = 2` the minimizer solves a weighted graph Laplacian system. For
//! `p = 3` the regularized energy `sum (|g|^2 + (eps h)^2)^(3/2)` is minimized
//! by damped Newton steps with `eps`-continuation, and the unregularized
//! energy of the final iterate is reported.

mod check;
mod linear;
mod newton;
mod stencil;

pub use check::{check_potential, PotentialReport, Violation};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::grid::{CellSet, CompactMask, GridDomain};
use crate::{Error, Result};
use linear::{pcg, Mic, WeightedLaplacian};
use stencil::{for_each_cell, Stencil};

/// Backtracking parameters for the Newton line search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Step shrink factor per rejected trial.
    pub shrink: f64,
    pub max_trials: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            armijo: 1e-4,
            shrink: 0.5,
            max_trials: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Initial gradient regularizer `eps` (in units of the gradient).
    pub epsilon_reg: f64,
    /// Continuation stops halving `eps` below this value.
    pub epsilon_min: f64,
    /// Newton iterations (`p = 3`).
    pub max_iters: usize,
    /// Conjugate-gradient iterations per linear solve.
    pub max_linear_iters: usize,
    /// Relative residual (`p = 2`) or relative energy decrease (`p = 3`) at which to stop.
    pub tol: f64,
    pub line_search: LineSearch,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon_reg: 1e-2,
            epsilon_min: 1e-4,
            max_iters: 200,
            max_linear_iters: 20_000,
            tol: 1e-10,
            line_search: LineSearch::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_reg > 0.0 && self.epsilon_min > 0.0 && self.tol > 0.0) {
            return Err(Error::Parameter(
                "epsilon_reg, epsilon_min and tol must be positive".into(),
            ));
        }
        let ls = &self.line_search;
        if !(ls.shrink > 0.0 && ls.shrink < 1.0 && ls.armijo > 0.0 && ls.armijo < 0.5) {
            return Err(Error::Parameter("invalid line search parameters".into()));
        }
        Ok(())
    }
}

/// Grid potential with values 1 on the clamp set and 0 outside `D`.
#[derive(Clone, Debug)]
pub struct PotentialField {
    domain: GridDomain,
    clamp: CellSet,
    values: Vec<f64>,
}

impl PotentialField {
    /// The initial guess: indicator of the clamp set.
    pub fn initial(domain: &GridDomain, clamp: &CellSet) -> Self {
        let mut values = vec![0.0; domain.spec().len()];
        for c in clamp.iter() {
            values[c] = 1.0;
        }
        PotentialField {
            domain: domain.clone(),
            clamp: clamp.clone(),
            values,
        }
    }

    /// Arbitrary values with the clamp and exterior values enforced.
    pub fn from_values(domain: &GridDomain, clamp: &CellSet, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.spec().len() {
            return Err(Error::Parameter("field size does not match the grid".into()));
        }
        for (c, v) in values.iter_mut().enumerate() {
            if !domain.is_inside(c) {
                *v = 0.0;
            }
        }
        for c in clamp.iter() {
            values[c] = 1.0;
        }
        Ok(PotentialField {
            domain: domain.clone(),
            clamp: clamp.clone(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn clamp(&self) -> &CellSet {
        &self.clamp
    }

    /// `u -> 1 - u` (clamp and exterior values swapped as well).
    pub fn complement(&self) -> Vec<f64> {
        self.values.iter().map(|v| 1.0 - v).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub value: f64,
    pub field: PotentialField,
    pub iterations: usize,
    pub residual: f64,
    pub h: f64,
    pub n: u32,
}

/// JSON record `{value, iterations, residual, h, n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord {
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub h: f64,
    pub n: u32,
}

impl CapacityResult {
    pub fn record(&self) -> CapacityRecord {
        CapacityRecord {
            value: self.value,
            iterations: self.iterations,
            residual: self.residual,
            h: self.h,
            n: self.n,
        }
    }
}

fn check_exponent(n_exp: u32) -> Result<()> {
    if n_exp == 2 || n_exp == 3 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("n must be 2 or 3, got {n_exp}")))
    }
}

/// `sum_cells |grad_h u|^p h^dim` over the whole box.
pub fn discrete_energy_values(domain: &GridDomain, values: &[f64], n_exp: u32) -> f64 {
    let spec = domain.spec();
    let p = n_exp as f64;
    let scale = spec.h().powf(spec.dim() as f64 - p);
    let mut total = 0.0;
    for_each_cell(spec, |_, pairs| {
        let g2: f64 = pairs
            .iter()
            .map(|&(lo, hi)| (values[hi] - values[lo]).powi(2))
            .sum();
        if g2 > 0.0 {
            total += g2.powf(0.5 * p);
        }
    });
    total * scale
}

pub fn discrete_energy(field: &PotentialField, n_exp: u32) -> f64 {
    discrete_energy_values(&field.domain, &field.values, n_exp)
}

fn validate_condenser(domain: &GridDomain, k: &CellSet) -> Result<()> {
    if k.is_empty() {
        return Err(Error::Domain("compact set is empty".into()));
    }
    if k.iter().any(|c| c >= domain.spec().len() || !domain.is_inside(c)) {
        return Err(Error::Domain(
            "compact set touches the outside of D: not a condenser".into(),
        ));
    }
    if k.len() >= domain.inside_count() {
        return Err(Error::Domain("compact set fills D: not a condenser".into()));
    }
    Ok(())
}

/// Minimize the discrete `n`-energy subject to `u = 1` on `K`, `u = 0` outside `D`.
pub fn solve_potential(
    domain: &GridDomain,
    k: &CellSet,
    n_exp: u32,
    cfg: &SolverConfig,
) -> Result<CapacityResult> {
    solve_potential_from(domain, k, n_exp, cfg, None)
}

/// As [`solve_potential`], starting from `initial` values on the free cells.
pub fn solve_potential_from(
    domain: &GridDomain,
    k: &CellSet,
    n_exp: u32,
    cfg: &SolverConfig,
    initial: Option<&[f64]>,
) -> Result<CapacityResult> {
    check_exponent(n_exp)?;
    cfg.validate()?;
    validate_condenser(domain, k)?;
    let st = Stencil::new(domain, k);
    let mut field = PotentialField::initial(domain, k);
    if let Some(init) = initial {
        if init.len() != field.values.len() {
            return Err(Error::Parameter("initial field size does not match the grid".into()));
        }
        for &c in &st.cells {
            field.values[c] = init[c];
        }
    }

    let (iterations, residual) = if n_exp == 2 {
        let out = solve_quadratic(&st, &mut field.values, cfg.tol, cfg.max_linear_iters);
        if !out.converged {
            return Err(Error::NoConvergence {
                iterations: out.iterations,
                residual: out.relative_residual,
                energy: discrete_energy_values(domain, &field.values, 2),
            });
        }
        (out.iterations, out.relative_residual)
    } else {
        if initial.is_none() {
            solve_quadratic(&st, &mut field.values, 1e-6, cfg.max_linear_iters);
        }
        newton::minimize(&st, &mut field.values, n_exp as f64, cfg)?
    };
    let value = discrete_energy_values(domain, &field.values, n_exp);
    Ok(CapacityResult {
        value,
        field,
        iterations,
        residual,
        h: domain.h(),
        n: n_exp,
    })
}

/// Convenience wrapper returning only the capacity value.
pub fn capacity(domain: &GridDomain, k: &CompactMask, n_exp: u32, cfg: &SolverConfig) -> Result<f64> {
    solve_potential(domain, k.cells(), n_exp, cfg).map(|r| r.value)
}

fn solve_quadratic(st: &Stencil, full: &mut [f64], tol: f64, max_iter: usize) -> linear::PcgOutcome {
    let spec = &st.spec;
    let mut edge: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; spec.len()]);
    for_each_cell(spec, |_, pairs| {
        for (axis, &(lo, hi)) in pairs.iter().enumerate() {
            if lo != hi {
                edge[axis][lo] += 1.0;
            }
        }
    });
    let a = WeightedLaplacian::assemble(st, &edge);
    let b = a.rhs(st, &edge, full);
    let mic = Mic::new(&a, 0.97);
    let mut x = vec![0.0; st.unknowns()];
    st.gather(full, &mut x);
    let out = pcg(
        |v, y| a.apply(v, y),
        |r, z| mic.solve(&a, r, z),
        &b,
        &mut x,
        tol,
        max_iter,
    );
    st.scatter(&x, full);
    out
}

/// `omega_(n-1) (log(R/r))^(1-n)`: capacity of the spherical ring `r < |x| < R` in R^n.
pub fn ring_capacity_oracle(r: f64, big_r: f64, n_exp: u32) -> Result<f64> {
    check_exponent(n_exp)?;
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Parameter(format!(
            "ring needs 0 < r < R, got r = {r}, R = {big_r}"
        )));
    }
    let omega = if n_exp == 2 { 2.0 * PI } else { 4.0 * PI };
    Ok(omega * (big_r / r).ln().powi(1 - n_exp as i32))
}
