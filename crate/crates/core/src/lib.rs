//! The torsion problem `Δu = n·ḣ(r)` on rotationally symmetric spaces
//! `dr² + h(r)² g_{S^{n−1}}`, where `h` is `r`, `sin r` or `sinh r`.
//!
//! * [`geometry`]: warping profiles and radial differential operators.
//! * [`closed_form`]: the radial solution `u = H(r) − H(R)` on geodesic balls.
//! * [`discretization`]: finite differences on star-shaped domains of surfaces.
//! * [`functionals`]: integral quantities and the identities between them.
//! * [`rigidity`]: Neumann-trace deviation and shape optimization.
//! * [`cli`]: the `warped-torsion` command-line front end.
//!
//! ```
//! use warped_torsion::closed_form::radial_torsion_solution;
//! use warped_torsion::discretization::{neumann_trace, solve_torsion, SolverOptions, StarDomain};
//! use warped_torsion::geometry::WarpingProfile;
//!
//! let sphere = WarpingProfile::hemisphere();
//! let ball = StarDomain::disk(std::f64::consts::FRAC_PI_4)?;
//! let u = solve_torsion(&sphere, &ball, 32, 64, SolverOptions::default())?;
//! let (mean, _) = neumann_trace(&u).statistics();
//!
//! let exact = radial_torsion_solution(&sphere, 2, std::f64::consts::FRAC_PI_4)?;
//! assert!((mean - exact.neumann_constant()).abs() < 1e-4);
//! # Ok::<(), warped_torsion::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![cfg_attr(test, allow(clippy::approx_constant))]

pub mod cli;
pub mod closed_form;
pub mod discretization;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod quadrature;
pub mod rigidity;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/radial.md")]
    mod radial {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/identities.md")]
    mod identities {}
    #[doc = include_str!("../../../book/src/rigidity.md")]
    mod rigidity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
