//! Finite differences for `Δ_g u = n ḣ` on star-shaped domains of two-dimensional
//! rotationally symmetric surfaces.
//!
//! The domain `{r < ρ(θ)}` is mapped to the unit disk by `r = s·ρ(θ)`. Radial nodes are
//! staggered (`s_j = (j+½)/Ns`) so none sits on the pole; the stencil reaches across
//! the pole to the ray `θ + π`, which is why `Nθ` must be even. The Dirichlet condition
//! enters through a ghost node at `s = 1 + ½Δs`.

mod assemble;
mod domain;
mod field;
mod grid;
pub mod sparse;

pub use assemble::{assemble, LinearSystem};
pub use domain::{BoundaryShape, StarDomain, VALIDATION_SAMPLES};
pub use field::{
    boundary_samples, default_max_iter, gradient_field, integrate, neumann_trace, solve,
    BoundarySample, DiscreteField, GradientField, NeumannTrace, NodeDerivatives,
    DEFAULT_SOLVER_TOL,
};
pub use grid::{build_grid, Grid};

use crate::error::Result;
use crate::geometry::WarpingProfile;

/// Linear solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// `None` selects `20·Ns·Nθ`.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_SOLVER_TOL,
            max_iter: None,
        }
    }
}

/// Grid, assembly and solve in one call.
pub fn solve_torsion(
    profile: &WarpingProfile,
    domain: &StarDomain,
    ns: usize,
    ntheta: usize,
    options: SolverOptions,
) -> Result<DiscreteField> {
    let grid = build_grid(domain, ns, ntheta)?;
    let system = assemble(profile, &grid, 2)?;
    let max_iter = options.max_iter.unwrap_or_else(|| default_max_iter(&grid));
    solve(&system, options.tol, max_iter)
}
