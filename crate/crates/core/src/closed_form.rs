//! Exact radial solutions of the torsion problem on geodesic balls.
//!
//! On the ball `{r < R}` the function `u = H(r) − H(R)` solves `Δu = n ḣ` with
//! `u = 0` on the boundary and constant Neumann data `c = h(R)`. Its Hessian is
//! `ḣ g`, so every pointwise identity can be checked analytically and every
//! integral quantity reduces to a one-dimensional quadrature in `r`.

use crate::error::{Error, Result};
use crate::functionals::{FunctionalCatalog, RawIntegrals};
use crate::geometry::{
    divergence_radial, laplacian_radial, newton_gap, radial_hessian, ricci_quadratic, RadialJet,
    WarpingProfile,
};
use crate::quadrature::{self, unit_sphere_area};

/// Absolute tolerance of the radial quadratures behind [`radial_functionals`].
pub const RADIAL_QUADRATURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RadialSolution {
    profile: WarpingProfile,
    n: usize,
    radius: f64,
    h_at_radius: f64,
    primitive_at_radius: f64,
}

/// The radial torsion solution on the geodesic ball of radius `radius`.
pub fn radial_torsion_solution(profile: &WarpingProfile, n: usize, radius: f64) -> Result<RadialSolution> {
    if n < 2 {
        return Err(Error::invalid("n", format!("dimension must be at least 2, got {n}")));
    }
    if !(radius > 0.0 && radius < profile.r_max()) {
        return Err(Error::OutOfRange {
            r: radius,
            limit: profile.r_max(),
        });
    }
    Ok(RadialSolution {
        profile: profile.clone(),
        n,
        radius,
        h_at_radius: profile.h(radius),
        primitive_at_radius: profile.primitive(radius),
    })
}

impl RadialSolution {
    pub fn profile(&self) -> &WarpingProfile {
        &self.profile
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Neumann constant `c = h(R)`.
    pub fn neumann_constant(&self) -> f64 {
        self.h_at_radius
    }

    pub fn u(&self, r: f64) -> f64 {
        self.profile.primitive(r) - self.primitive_at_radius
    }

    pub fn u_r(&self, r: f64) -> f64 {
        self.profile.h(r)
    }

    /// `(u, u_r, u_rr)` at `r`.
    pub fn jet(&self, r: f64) -> RadialJet {
        RadialJet::new(self.u(r), self.profile.h(r), self.profile.h_dot(r))
    }

    fn check_inside(&self, r: f64) -> Result<()> {
        if r > 0.0 && r < self.radius {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                r,
                limit: self.radius,
            })
        }
    }

    /// The two distinct Hessian eigenvalues (radial, angular).
    pub fn hessian_eigenvalues(&self, r: f64) -> Result<(f64, f64)> {
        radial_hessian(&self.profile, &self.jet(r), r)
    }

    /// `Δu` evaluated through the radial Laplacian of the jet.
    pub fn laplacian(&self, r: f64) -> Result<f64> {
        laplacian_radial(&self.profile, self.n, &self.jet(r), r)
    }

    /// `d/dr Δu`, from differentiating `f̈ + (n−1)(ḣ/h)ḟ` with `f''' = ḧ`.
    fn laplacian_derivative(&self, r: f64) -> f64 {
        let (h, d, dd) = (self.profile.h(r), self.profile.h_dot(r), self.profile.h_ddot(r));
        let (f1, f2, f3) = (h, d, dd);
        f3 + (self.n - 1) as f64 * ((dd / h - d * d / (h * h)) * f1 + d / h * f2)
    }

    /// `|∇²u|² = λ_r² + (n−1)λ_t²`.
    fn hessian_norm_sq(&self, r: f64) -> Result<f64> {
        let (radial, angular) = self.hessian_eigenvalues(r)?;
        Ok(radial * radial + (self.n - 1) as f64 * angular * angular)
    }
}

/// Signed residual of the Bochner–Weitzenböck formula,
/// `½Δ|Du|² − |∇²u|² − g(D(Δu), Du) − Ric(Du, Du)`, at `0 < r < R`.
pub fn bochner_residual(sol: &RadialSolution, r: f64) -> Result<f64> {
    sol.check_inside(r)?;
    let p = &sol.profile;
    // |Du|² = h², so ½|Du|² has jet (h²/2, hḣ, ḣ² + hḧ).
    let half_lap_grad_sq = laplacian_radial(p, sol.n, &p.half_h_squared_jet(r), r)?;
    let hess_sq = sol.hessian_norm_sq(r)?;
    let grad_lap_dot_grad = sol.laplacian_derivative(r) * sol.u_r(r);
    let ricci = ricci_quadratic(p, sol.n, r, sol.u_r(r), 0.0)?;
    Ok(half_lap_grad_sq - hess_sq - grad_lap_dot_grad - ricci)
}

/// Residual of the pointwise Pohožaev-type identity
/// `div(½|Du|² X − h u_r Du) = (n−2)/2 ḣ|Du|² − h u_r Δu`, `X = h∂_r`, at `0 < r < R`.
pub fn pohozaev_pointwise_residual(sol: &RadialSolution, r: f64) -> Result<f64> {
    sol.check_inside(r)?;
    let p = &sol.profile;
    let (h, d) = (p.h(r), p.h_dot(r));
    let (ur, urr) = (sol.u_r(r), d);
    // Radial field coefficient φ = ½u_r²·h − h·u_r·u_r and its r-derivative.
    let phi = 0.5 * ur * ur * h - h * ur * ur;
    let phi_dot = ur * urr * h + 0.5 * ur * ur * d - (d * ur * ur + 2.0 * h * ur * urr);
    let lhs = divergence_radial(p, sol.n, &RadialJet::new(phi, phi_dot, 0.0), r)?;
    let grad_sq = ur * ur;
    let rhs = 0.5 * (sol.n as f64 - 2.0) * d * grad_sq - h * ur * sol.laplacian(r)?;
    Ok(lhs - rhs)
}

/// Newton-inequality defect of the radial Hessian; vanishes identically.
pub fn newton_equality_check(sol: &RadialSolution, r: f64) -> Result<f64> {
    sol.check_inside(r)?;
    let (radial, angular) = sol.hessian_eigenvalues(r)?;
    let mut eigs = vec![angular; sol.n];
    eigs[0] = radial;
    Ok(newton_gap(sol.n, &eigs))
}

/// All integral quantities of the torsion problem on the ball, by adaptive quadrature
/// of the closed-form radial integrands against `|S^{n−1}| h^{n−1} dr`.
pub fn radial_functionals(sol: &RadialSolution) -> Result<FunctionalCatalog> {
    let p = &sol.profile;
    let n = sol.n;
    let nf = n as f64;
    let area = unit_sphere_area(n);
    let radius = sol.radius;

    let volume_integral = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let g = |r: f64| f(r) * p.h(r).powi(n as i32 - 1);
        // The tolerance is applied to the final (area-weighted) value.
        Ok(area * quadrature::integrate(g, 0.0, radius, RADIAL_QUADRATURE_TOL / area)?)
    };

    let neg_u = |r: f64| -sol.u(r);
    let c = sol.neumann_constant();
    let bdry_measure = area * c.powi(n as i32 - 1);

    let int_hdot = volume_integral(&|r| p.h_dot(r))?;
    let int_hdot_gradsq = volume_integral(&|r| p.h_dot(r) * sol.u_r(r).powi(2))?;
    // Gauss–Kronrod nodes are interior, so the pointwise operators never see r = 0 or R;
    // a rejected point would surface as NaN and fail the quadrature.
    let lhs_bw = volume_integral(&|r| {
        neg_u(r) * laplacian_radial(p, n, &p.half_h_squared_jet(r), r).unwrap_or(f64::NAN)
    })?;
    let int_negu_gradsq = volume_integral(&|r| neg_u(r) * sol.u_r(r).powi(2))?;
    let int_negu_h_ur = volume_integral(&|r| neg_u(r) * p.h(r) * sol.u_r(r))?;
    let int_negu_hdot_sq = volume_integral(&|r| neg_u(r) * p.h_dot(r).powi(2))?;
    let int_negu_ur_hddot = volume_integral(&|r| neg_u(r) * sol.u_r(r) * p.h_ddot(r))?;
    let int_negu_h_hddot = volume_integral(&|r| neg_u(r) * p.h(r) * p.h_ddot(r))?;
    let int_negu_hsq = volume_integral(&|r| neg_u(r) * p.h(r).powi(2))?;
    let int_ur_h_hdot = volume_integral(&|r| sol.u_r(r) * p.h(r) * p.h_dot(r))?;
    let int_negu_ricci = volume_integral(&|r| {
        neg_u(r) * ricci_quadratic(p, n, r, sol.u_r(r), 0.0).unwrap_or(f64::NAN)
    })?;
    // |∇²u|² − (Δu)²/n is the Newton defect divided by n.
    let newton_int = volume_integral(&|r| {
        neg_u(r) * newton_equality_check(sol, r).unwrap_or(f64::NAN) / nf
    })?;
    let pohozaev_bulk = volume_integral(&|r| {
        let (h, d) = (p.h(r), p.h_dot(r));
        let ur = sol.u_r(r);
        0.5 * (nf - 2.0) * d * ur * ur - h * ur * nf * d
    })?;
    // On the sphere of radius R: ν = ∂_r, g(X, ν) = h(R), ∂_ν u = u_r = h(R).
    let pohozaev_flux = bdry_measure * (0.5 * c * c * c - c * c * c);

    Ok(FunctionalCatalog::from_integrals(RawIntegrals {
        n,
        bdry_measure,
        int_hdot,
        int_hdot_gradsq,
        lhs_bw,
        int_negu_gradsq,
        int_negu_h_ur,
        int_negu_hdot_sq,
        int_negu_ur_hddot,
        int_negu_h_hddot,
        int_negu_hsq,
        int_ur_h_hdot,
        int_negu_ricci,
        newton_int,
        pohozaev_flux,
        pohozaev_bulk,
        c_mean: c,
        c_std: 0.0,
    }))
}
