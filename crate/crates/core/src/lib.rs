//! Numerical laboratory for conformal capacity and the modulus metric.
//!
//! Domains are rasterized on uniform grids in two or three dimensions.
//! Capacities are computed by minimizing the discrete `n`-energy over
//! clamped grid potentials, and the modulus metric `mu_D(x, y)` is the
//! smallest capacity found over rasterized polylines joining `x` and `y`.
//! The exact sphere geometry (inversion, polarization, the three-spheres
//! construction and the cone radii) lives in [`geometry`].

pub mod capacity;
pub mod error;
pub mod export;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod modmetric;
pub mod special;

pub use error::{Error, Result};
pub use geometry::{Point, Sphere};
