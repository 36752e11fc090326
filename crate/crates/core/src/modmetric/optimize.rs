//! Pattern search over polylines with memoized capacities.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MetricResult, OptConfig, Polyline};
use crate::capacity::solve_potential_from;
use crate::geometry::Point;
use crate::grid::{rasterize_polyline, segment_walk, CellSet, CompactMask, GridDomain};
use crate::{Error, Result};

/// Relative improvement a candidate needs to replace the incumbent.
const IMPROVEMENT: f64 = 1e-9;

/// Reusable workspace for metric evaluations on one domain: a capacity
/// cache keyed by the rasterized mask and the last potential as warm start.
pub struct MetricSolver<'a> {
    domain: &'a GridDomain,
    n_exp: u32,
    cfg: OptConfig,
    cache: HashMap<Vec<usize>, f64>,
    warm: Option<Vec<f64>>,
    solves: usize,
}

/// Search space: `vertex_i = base_i + sum_b coef_(i,b) * basis_(i,b)` for interior vertices.
struct Family {
    base: Vec<Point>,
    basis: Vec<Vec<Point>>,
}

impl Family {
    fn coordinates(&self) -> usize {
        self.basis.iter().map(Vec::len).sum()
    }

    fn vertices(&self, coefs: &[f64]) -> Vec<Point> {
        let mut out = self.base.clone();
        let mut k = 0;
        for (i, dirs) in self.basis.iter().enumerate() {
            for d in dirs {
                out[i + 1] = out[i + 1] + *d * coefs[k];
                k += 1;
            }
        }
        out
    }
}

fn perpendiculars(u: &Point) -> Vec<Point> {
    if u.dim() == 2 {
        return vec![Point::xy(-u.get(1), u.get(0))];
    }
    let axis = (0..3)
        .min_by(|&a, &b| u.get(a).abs().total_cmp(&u.get(b).abs()))
        .unwrap_or(0);
    let e = Point::unit(3, axis);
    let p = (e - *u * u.dot(&e)).normalized().unwrap_or(e);
    let (a, b) = (u.coords(), p.coords());
    let q = Point::xyz(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    );
    vec![p, q]
}

impl<'a> MetricSolver<'a> {
    pub fn new(domain: &'a GridDomain, n_exp: u32, cfg: OptConfig) -> Result<Self> {
        if n_exp != 2 && n_exp != 3 {
            return Err(Error::Parameter(format!("n must be 2 or 3, got {n_exp}")));
        }
        cfg.validate()?;
        Ok(MetricSolver {
            domain,
            n_exp,
            cfg,
            cache: HashMap::new(),
            warm: None,
            solves: 0,
        })
    }

    pub fn domain(&self) -> &'a GridDomain {
        self.domain
    }

    pub fn n_exp(&self) -> u32 {
        self.n_exp
    }

    /// Capacity solves performed so far (cache misses).
    pub fn solves(&self) -> usize {
        self.solves
    }

    /// `cap(D, mask)`, memoized.
    pub fn capacity_of(&mut self, mask: &CompactMask) -> Result<f64> {
        if let Some(&v) = self.cache.get(mask.cells().as_slice()) {
            return Ok(v);
        }
        let res = solve_potential_from(
            self.domain,
            mask.cells(),
            self.n_exp,
            &self.cfg.solver,
            self.warm.as_deref(),
        )?;
        self.solves += 1;
        self.cache.insert(mask.cells().as_slice().to_vec(), res.value);
        self.warm = Some(res.field.values().to_vec());
        Ok(res.value)
    }

    /// Capacity of the rasterized polyline, or `None` if it is not admissible.
    fn evaluate(&mut self, vertices: &[Point]) -> Result<Option<(f64, CompactMask)>> {
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Ok(None);
        }
        let mask = match rasterize_polyline(vertices, self.domain) {
            Ok(m) => m,
            Err(Error::CurveLeavesDomain | Error::Domain(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        match self.capacity_of(&mask) {
            Ok(v) => Ok(Some((v, mask))),
            Err(Error::Domain(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn seed(&self, x: &Point, y: &Point, cx: usize, cy: usize) -> Result<Family> {
        let spec = self.domain.spec();
        let straight = segment_walk(spec, x, y)
            .map(|cells| cells.iter().all(|&c| self.domain.is_inside(c)))
            .unwrap_or(false);
        if straight {
            let m = self.cfg.control_points;
            let chord = *y - *x;
            let u = chord.normalized().ok_or_else(|| Error::Parameter("x and y coincide".into()))?;
            let mut base = vec![*x];
            base.extend((1..=m).map(|i| *x + chord * (i as f64 / (m + 1) as f64)));
            base.push(*y);
            let perp = perpendiculars(&u);
            return Ok(Family {
                base,
                basis: vec![perp; m],
            });
        }
        let path = self.domain.inside_path(cx, cy).ok_or(Error::DifferentComponents)?;
        let visible = |a: &Point, b: &Point| {
            segment_walk(spec, a, b)
                .map(|cells| cells.iter().all(|&c| self.domain.is_inside(c)))
                .unwrap_or(false)
        };
        // greedy simplification: walk as far along the path as stays visible
        let target = |j: usize| if j + 1 == path.len() { *y } else { spec.center(path[j]) };
        let mut base = vec![*x];
        let mut i = 0;
        while i + 1 < path.len() {
            let from = *base.last().unwrap_or(x);
            let mut j = i + 1;
            while j + 1 < path.len() && visible(&from, &target(j + 1)) {
                j += 1;
            }
            base.push(target(j));
            i = j;
        }
        if base.len() < 2 {
            base.push(*y);
        }
        let axes: Vec<Point> = (0..spec.dim()).map(|a| Point::unit(spec.dim(), a)).collect();
        let interior = base.len() - 2;
        Ok(Family {
            base,
            basis: vec![axes; interior],
        })
    }

    /// `mu_D(x, y)` over polylines; see [`super::modulus_metric`].
    pub fn metric(&mut self, x: &Point, y: &Point) -> Result<MetricResult> {
        let dim = self.domain.dim();
        if x.dim() != dim || y.dim() != dim {
            return Err(Error::Parameter("point dimension does not match the domain".into()));
        }
        let cx = self
            .domain
            .inside_cell(x)
            .ok_or_else(|| Error::Domain(format!("x = {:?} is outside D", x.coords())))?;
        let cy = self
            .domain
            .inside_cell(y)
            .ok_or_else(|| Error::Domain(format!("y = {:?} is outside D", y.coords())))?;
        if cx == cy {
            return Ok(MetricResult {
                value: 0.0,
                minimizer: Polyline::segment(*x, *y),
                mask: CompactMask::new(self.domain, CellSet::new(vec![cx]))?,
                evals: 0,
                converged: true,
            });
        }

        let family = self.seed(x, y, cx, cy)?;
        let h = self.domain.h();
        let scale = x.dist(y);
        let step0 = (self.cfg.initial_step * scale).max(self.cfg.min_step * h);
        let min_step = self.cfg.min_step * h;
        let ncoef = family.coordinates();
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut evals = 0;

        let mut best_coefs = vec![0.0; ncoef];
        let (mut best, mut best_mask) = match self.evaluate(&family.vertices(&best_coefs))? {
            Some(v) => v,
            None => return Err(Error::CurveLeavesDomain),
        };
        evals += 1;
        let mut converged = true;

        for start in 0..=self.cfg.restarts {
            let mut coefs = best_coefs.clone();
            let mut value = best;
            let mut mask = best_mask.clone();
            if start > 0 {
                // random restart around the incumbent
                let mut found = false;
                for _ in 0..20 {
                    let trial: Vec<f64> = best_coefs
                        .iter()
                        .map(|c| c + step0 * rng.gen_range(-1.0..=1.0))
                        .collect();
                    evals += 1;
                    if let Some((v, m)) = self.evaluate(&family.vertices(&trial))? {
                        coefs = trial;
                        value = v;
                        mask = m;
                        found = true;
                        break;
                    }
                }
                if !found {
                    continue;
                }
            }
            let mut order: Vec<usize> = (0..ncoef).collect();
            let mut step = step0;
            while step >= min_step && ncoef > 0 {
                if evals >= self.cfg.max_evals {
                    converged = false;
                    break;
                }
                order.shuffle(&mut rng);
                let mut improved = false;
                for &k in &order {
                    for sign in [1.0, -1.0] {
                        let mut trial = coefs.clone();
                        trial[k] += sign * step;
                        evals += 1;
                        if let Some((v, m)) = self.evaluate(&family.vertices(&trial))? {
                            if v < value * (1.0 - IMPROVEMENT) {
                                coefs = trial;
                                value = v;
                                mask = m;
                                improved = true;
                                break;
                            }
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            if value < best {
                best = value;
                best_coefs = coefs;
                best_mask = mask;
            }
        }

        let mut vertices = family.vertices(&best_coefs);
        vertices.dedup();
        Ok(MetricResult {
            value: best,
            minimizer: Polyline::new(vertices)?,
            mask: best_mask,
            evals,
            converged,
        })
    }
}
