use std::sync::Arc;

use rayon::prelude::*;

use super::grid::Grid;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::WarpingProfile;

/// Metric and mapping coefficients at one grid node.
///
/// With `r = sρ(θ)` and `a = sρ′/ρ`, physical derivatives follow from
/// `∂_r = ρ⁻¹∂_s` and `∂_θ|_r = ∂_θ|_s − a∂_s`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeMetric {
    pub rho: f64,
    pub a: f64,
    pub a_s: f64,
    pub a_theta: f64,
    pub h: f64,
    pub h_dot: f64,
}

impl NodeMetric {
    pub fn at(grid: &Grid, profile: &WarpingProfile, s: f64, i: usize) -> Self {
        let (rho, d1, d2) = grid.rho_jet(i);
        let r = s * rho;
        NodeMetric {
            rho,
            a: s * d1 / rho,
            a_s: d1 / rho,
            a_theta: s * (d2 * rho - d1 * d1) / (rho * rho),
            h: profile.h(r),
            h_dot: profile.h_dot(r),
        }
    }

    /// Coefficients `(A, B, C, D)` of `Δu = A U_ss + B U_sθ + C U_θθ + D U_s`.
    pub fn laplacian_coefficients(&self) -> (f64, f64, f64, f64) {
        let inv_h2 = 1.0 / (self.h * self.h);
        let a_coef = 1.0 / (self.rho * self.rho) + self.a * self.a * inv_h2;
        let b_coef = -2.0 * self.a * inv_h2;
        let c_coef = inv_h2;
        let d_coef = self.h_dot / (self.h * self.rho) + (self.a * self.a_s - self.a_theta) * inv_h2;
        (a_coef, b_coef, c_coef, d_coef)
    }
}

/// Expresses the value at virtual node `(j, i)` as a combination of true unknowns.
///
/// `j = Ns` is the ghost beyond the boundary, from the quadratic through `u(1) = 0`
/// and the last two nodes. `j = −1` is the reflection through the pole: the point at
/// `s = −s₀` on ray `θ` is the point at `s₀ρ(θ)/ρ(θ+π)` on ray `θ+π`, interpolated
/// quadratically from the first three nodes of that ray.
pub(crate) fn resolve_node(grid: &Grid, j: isize, i: isize, scale: f64, out: &mut Vec<(usize, f64)>) {
    let i = grid.wrap(i);
    let ns = grid.ns() as isize;
    if (0..ns).contains(&j) {
        out.push((grid.index(j as usize, i), scale));
    } else if j == ns {
        let last = grid.ns() - 1;
        out.push((grid.index(last, i), -2.0 * scale));
        out.push((grid.index(last - 1, i), scale / 3.0));
    } else if j == -1 {
        let opp = grid.opposite(i);
        let t = 0.5 * (grid.rho(i) / grid.rho(opp) - 1.0);
        if t == 0.0 {
            out.push((grid.index(0, opp), scale));
        } else {
            let w = [0.5 * (t - 1.0) * (t - 2.0), -t * (t - 2.0), 0.5 * t * (t - 1.0)];
            for (k, wk) in w.iter().enumerate() {
                out.push((grid.index(k, opp), scale * wk));
            }
        }
    } else {
        panic!("virtual radial index {j} is outside the stencil reach");
    }
}

/// Sparse system `A u = b` for the discrete torsion problem.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub(crate) grid: Arc<Grid>,
    pub(crate) profile: WarpingProfile,
    pub(crate) n: usize,
}

impl LinearSystem {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn profile(&self) -> &WarpingProfile {
        &self.profile
    }
}

/// Assembles `Δ_g u = n ḣ(r)` with `u = 0` on `s = 1`, in two dimensions.
///
/// Centered second-order differences in `(s, θ)` after the map `r = sρ(θ)`; the
/// mixed derivative brings the four corner nodes in whenever `ρ′ ≠ 0`.
pub fn assemble(profile: &WarpingProfile, grid: &Grid, n: usize) -> Result<LinearSystem> {
    if n != 2 {
        return Err(Error::invalid("n", format!("the finite-difference solver is two-dimensional, got n = {n}")));
    }
    grid.domain().validate(profile.r_max())?;
    let (ds, dt) = (grid.ds(), grid.dtheta());
    let nt = grid.ntheta();

    let rows: Vec<(Vec<(usize, f64)>, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (j, i) = (k / nt, k % nt);
            let m = NodeMetric::at(grid, profile, grid.s(j), i);
            let (ac, bc, cc, dc) = m.laplacian_coefficients();
            let (jj, ii) = (j as isize, i as isize);
            let mut row = Vec::with_capacity(16);
            row.push((k, -2.0 * ac / (ds * ds) - 2.0 * cc / (dt * dt)));
            resolve_node(grid, jj + 1, ii, ac / (ds * ds) + dc / (2.0 * ds), &mut row);
            resolve_node(grid, jj - 1, ii, ac / (ds * ds) - dc / (2.0 * ds), &mut row);
            resolve_node(grid, jj, ii + 1, cc / (dt * dt), &mut row);
            resolve_node(grid, jj, ii - 1, cc / (dt * dt), &mut row);
            if bc != 0.0 {
                let w = bc / (4.0 * ds * dt);
                resolve_node(grid, jj + 1, ii + 1, w, &mut row);
                resolve_node(grid, jj + 1, ii - 1, -w, &mut row);
                resolve_node(grid, jj - 1, ii + 1, -w, &mut row);
                resolve_node(grid, jj - 1, ii - 1, w, &mut row);
            }
            (row, n as f64 * m.h_dot)
        })
        .collect();

    let (rows, rhs): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(LinearSystem {
        matrix: CsrMatrix::from_rows(rows),
        rhs,
        grid: Arc::new(grid.clone()),
        profile: profile.clone(),
        n,
    })
}
