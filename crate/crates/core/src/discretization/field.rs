use std::sync::Arc;

use rayon::prelude::*;

use super::assemble::{resolve_node, LinearSystem, NodeMetric};
use super::grid::Grid;
use super::sparse::{bicgstab, SolveStats};
use crate::error::Result;
use crate::geometry::WarpingProfile;

/// Nodal values of a function on a boundary-fitted polar grid, with the grid,
/// domain and profile it lives on.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    grid: Arc<Grid>,
    profile: WarpingProfile,
    n: usize,
    values: Vec<f64>,
    stats: Option<SolveStats>,
}

impl DiscreteField {
    /// Samples `f(r, θ)` at the grid nodes. The boundary ghost convention assumes
    /// `f = 0` on the boundary.
    pub fn from_fn(grid: &Grid, profile: &WarpingProfile, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (j, i) = (k / grid.ntheta(), k % grid.ntheta());
                f(grid.radius(j, i), grid.theta(i))
            })
            .collect();
        DiscreteField {
            grid: Arc::new(grid.clone()),
            profile: profile.clone(),
            n: 2,
            values,
            stats: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn profile(&self) -> &WarpingProfile {
        &self.profile
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.values[self.grid.index(j, i)]
    }

    pub fn solve_stats(&self) -> Option<SolveStats> {
        self.stats
    }

    /// Value at a possibly virtual node, using the pole and boundary ghost rules.
    fn virtual_value(&self, j: isize, i: isize, scratch: &mut Vec<(usize, f64)>) -> f64 {
        scratch.clear();
        resolve_node(&self.grid, j, i, 1.0, scratch);
        scratch.iter().map(|&(k, w)| w * self.values[k]).sum()
    }

    /// `∂_s U` on the boundary `s = 1` at angle index `i`, one-sided second order
    /// through `U(1) = 0` and the last two nodes.
    fn boundary_s_derivative(&self, i: usize) -> f64 {
        let last = self.grid.ns() - 1;
        let (ul, up) = (self.value(last, i), self.value(last - 1, i));
        (-3.0 * ul + up / 3.0) / self.grid.ds()
    }
}

/// Dirichlet solve of an assembled system to relative residual `tol`.
///
/// Rows are divided by their diagonal first; near the pole the raw rows grow like
/// `1/(s²Δθ²)` and the unscaled residual cannot drop below the rounding floor.
/// `tol` therefore applies to the equilibrated system.
pub fn solve(system: &LinearSystem, tol: f64, max_iter: usize) -> Result<DiscreteField> {
    let (matrix, rhs) = system.matrix.row_equilibrated(&system.rhs);
    let (values, stats) = bicgstab(&matrix, &rhs, tol, max_iter)?;
    Ok(DiscreteField {
        grid: system.grid.clone(),
        profile: system.profile.clone(),
        n: system.n,
        values,
        stats: Some(stats),
    })
}

/// Default relative residual target of the linear solve.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

/// Default iteration cap: `20·Ns·Nθ`.
pub fn default_max_iter(grid: &Grid) -> usize {
    20 * grid.len()
}

/// First and second covariant derivatives at one node, in the orthonormal frame
/// `(∂_r, h⁻¹∂_θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeDerivatives {
    pub u_r: f64,
    /// Angular component `u_θ / h`.
    pub u_t: f64,
    pub grad_sq: f64,
    pub hess_rr: f64,
    pub hess_rt: f64,
    pub hess_tt: f64,
}

impl NodeDerivatives {
    pub fn laplacian(&self) -> f64 {
        self.hess_rr + self.hess_tt
    }

    pub fn hessian_norm_sq(&self) -> f64 {
        self.hess_rr * self.hess_rr + 2.0 * self.hess_rt * self.hess_rt + self.hess_tt * self.hess_tt
    }

    /// `∇²u(Du, Du)`, which equals `½ g(Du, D|Du|²)`.
    pub fn hessian_on_gradient(&self) -> f64 {
        self.hess_rr * self.u_r * self.u_r
            + 2.0 * self.hess_rt * self.u_r * self.u_t
            + self.hess_tt * self.u_t * self.u_t
    }
}

/// Gradients and Hessians of a discrete field at every node.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub nodes: Vec<NodeDerivatives>,
}

/// Second-order centered differences in `(s, θ)`, mapped to `(r, θ)`.
///
/// Hessian in the orthonormal frame: `u_rr`, `u_rθ/h − ḣu_θ/h²` and
/// `u_θθ/h² + ḣu_r/h`.
pub fn gradient_field(u: &DiscreteField) -> GradientField {
    let grid = &*u.grid;
    let (ds, dt) = (grid.ds(), grid.dtheta());
    let nt = grid.ntheta();
    let nodes = (0..grid.len())
        .into_par_iter()
        .map_init(Vec::new, |scratch, k| {
            let (j, i) = (k / nt, k % nt);
            let (jj, ii) = (j as isize, i as isize);
            let mut at = |dj: isize, di: isize| u.virtual_value(jj + dj, ii + di, scratch);
            let c = u.values[k];
            let (n_, s_) = (at(1, 0), at(-1, 0));
            let (e_, w_) = (at(0, 1), at(0, -1));
            let corners = at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1);

            let us = (n_ - s_) / (2.0 * ds);
            let uss = (n_ - 2.0 * c + s_) / (ds * ds);
            let ut = (e_ - w_) / (2.0 * dt);
            let utt = (e_ - 2.0 * c + w_) / (dt * dt);
            let ust = corners / (4.0 * ds * dt);

            let m = NodeMetric::at(grid, &u.profile, grid.s(j), i);
            let u_r = us / m.rho;
            let u_theta = ut - m.a * us;
            let u_rr = uss / (m.rho * m.rho);
            let u_thth = utt - 2.0 * m.a * ust + m.a * m.a * uss + (m.a * m.a_s - m.a_theta) * us;
            let u_rth = (ust - m.a_s * us - m.a * uss) / m.rho;

            let u_t = u_theta / m.h;
            NodeDerivatives {
                u_r,
                u_t,
                grad_sq: u_r * u_r + u_t * u_t,
                hess_rr: u_rr,
                hess_rt: u_rth / m.h - m.h_dot * u_theta / (m.h * m.h),
                hess_tt: u_thth / (m.h * m.h) + m.h_dot * u_r / m.h,
            }
        })
        .collect();
    GradientField { nodes }
}

/// Boundary data at angle `θ_i`, on `r = ρ(θ_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub theta: f64,
    pub rho: f64,
    pub h: f64,
    pub u_r: f64,
    pub u_t: f64,
    /// Radial component of the outward unit normal.
    pub normal_r: f64,
    pub normal_derivative: f64,
    /// Arclength weight `√(ρ′² + h(ρ)²)·Δθ`.
    pub weight: f64,
}

/// Boundary gradients from the one-sided derivative in `s`; along `s = 1` the field
/// vanishes, so `U_θ = 0` there.
pub fn boundary_samples(u: &DiscreteField) -> Vec<BoundarySample> {
    let grid = &*u.grid;
    (0..grid.ntheta())
        .map(|i| {
            let (rho, d1, _) = grid.rho_jet(i);
            let h = u.profile.h(rho);
            let us = u.boundary_s_derivative(i);
            let u_r = us / rho;
            let u_t = -(d1 / rho) * us / h;
            let norm = (1.0 + d1 * d1 / (h * h)).sqrt();
            let (nu_r, nu_t) = (1.0 / norm, -d1 / h / norm);
            BoundarySample {
                theta: grid.theta(i),
                rho,
                h,
                u_r,
                u_t,
                normal_r: nu_r,
                normal_derivative: u_r * nu_r + u_t * nu_t,
                weight: (d1 * d1 + h * h).sqrt() * grid.dtheta(),
            }
        })
        .collect()
}

/// Samples of `∂_ν u` on the boundary with their arclength weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannTrace {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NeumannTrace {
    /// Arclength-weighted mean and standard deviation.
    pub fn statistics(&self) -> (f64, f64) {
        let total: f64 = self.weights.iter().sum();
        let mean = self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>() / total;
        let var = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * (v - mean) * (v - mean))
            .sum::<f64>()
            / total;
        (mean, var.sqrt())
    }

    /// Total boundary length.
    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn neumann_trace(u: &DiscreteField) -> NeumannTrace {
    let samples = boundary_samples(u);
    NeumannTrace {
        theta: samples.iter().map(|b| b.theta).collect(),
        values: samples.iter().map(|b| b.normal_derivative).collect(),
        weights: samples.iter().map(|b| b.weight).collect(),
    }
}

/// Midpoint-rule integral `Σ f·h(r)·ρ·Δs·Δθ` against the two-dimensional volume form.
pub fn integrate(values: &[f64], u: &DiscreteField) -> f64 {
    let grid = &*u.grid;
    assert_eq!(values.len(), grid.len(), "one value per node");
    let cell = grid.ds() * grid.dtheta();
    values
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let (j, i) = (k / grid.ntheta(), k % grid.ntheta());
            f * u.profile.h(grid.radius(j, i)) * grid.rho(i) * cell
        })
        .sum()
}
