use std::f64::consts::PI;

use super::domain::StarDomain;
use crate::error::{Error, Result};

/// Staggered boundary-fitted polar grid.
///
/// Nodes sit at `(s_j, θ_i)` with `s_j = (j + ½)/Ns` for `j = 0..Ns` (0-based) and
/// `θ_i = 2πi/Nθ`; the physical radius is `r = s·ρ(θ)`. No node sits on the pole or
/// on the boundary `s = 1`. Node `(j, i)` has linear index `j·Nθ + i`.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: StarDomain,
    ns: usize,
    ntheta: usize,
    rho: Vec<f64>,
    rho_d1: Vec<f64>,
    rho_d2: Vec<f64>,
}

impl Grid {
    pub fn new(domain: &StarDomain, ns: usize, ntheta: usize) -> Result<Self> {
        if ns < 8 {
            return Err(Error::invalid("Ns", format!("need at least 8 radial cells, got {ns}")));
        }
        if ntheta < 16 {
            return Err(Error::invalid("Ntheta", format!("need at least 16 angular cells, got {ntheta}")));
        }
        if !ntheta.is_multiple_of(2) {
            return Err(Error::invalid("Ntheta", format!("must be even for the pole stencil, got {ntheta}")));
        }
        let mut rho = Vec::with_capacity(ntheta);
        let mut rho_d1 = Vec::with_capacity(ntheta);
        let mut rho_d2 = Vec::with_capacity(ntheta);
        for i in 0..ntheta {
            let (r, d1, d2) = domain.rho_jet(2.0 * PI * i as f64 / ntheta as f64);
            rho.push(r);
            rho_d1.push(d1);
            rho_d2.push(d2);
        }
        Ok(Grid {
            domain: domain.clone(),
            ns,
            ntheta,
            rho,
            rho_d1,
            rho_d2,
        })
    }

    pub fn domain(&self) -> &StarDomain {
        &self.domain
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn len(&self) -> usize {
        self.ns * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ds(&self) -> f64 {
        1.0 / self.ns as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    pub fn s(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.ns as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.ntheta as f64
    }

    pub fn index(&self, j: usize, i: usize) -> usize {
        j * self.ntheta + i
    }

    /// Angular index with periodic wrap-around.
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.ntheta as isize) as usize
    }

    /// Index of the angle `θ_i + π`.
    pub fn opposite(&self, i: usize) -> usize {
        (i + self.ntheta / 2) % self.ntheta
    }

    /// `(ρ, ρ′, ρ″)` at angle index `i`.
    pub fn rho_jet(&self, i: usize) -> (f64, f64, f64) {
        (self.rho[i], self.rho_d1[i], self.rho_d2[i])
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho[i]
    }

    pub fn radius(&self, j: usize, i: usize) -> f64 {
        self.s(j) * self.rho[i]
    }

    pub fn max_radius(&self) -> f64 {
        self.rho.iter().cloned().fold(0.0, f64::max) * self.s(self.ns - 1)
    }
}

/// Builds the staggered grid of `domain` with `ns × ntheta` nodes.
pub fn build_grid(domain: &StarDomain, ns: usize, ntheta: usize) -> Result<Grid> {
    Grid::new(domain, ns, ntheta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_examples() {
        let disk = StarDomain::disk(1.0).unwrap();
        let g = build_grid(&disk, 8, 16).unwrap();
        assert_eq!(g.len(), 128);
        assert_eq!(g.s(0), 1.0 / 16.0);

        let g = build_grid(&disk, 32, 64).unwrap();
        assert_eq!(g.radius(31, 0), 0.984_375 * disk.rho(0.0));

        let d = StarDomain::fourier(0.8, vec![0.0, 0.0, 0.15], vec![]).unwrap();
        let g = build_grid(&d, 16, 48).unwrap();
        assert_abs_diff_eq!(g.max_radius(), 0.92 * 31.0 / 32.0, epsilon = 1e-14);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        let disk = StarDomain::disk(1.0).unwrap();
        assert!(build_grid(&disk, 7, 16).is_err());
        assert!(build_grid(&disk, 8, 14).is_err());
        assert!(build_grid(&disk, 8, 17).is_err());
    }

    #[test]
    fn periodic_helpers() {
        let g = build_grid(&StarDomain::disk(1.0).unwrap(), 8, 16).unwrap();
        assert_eq!(g.wrap(-1), 15);
        assert_eq!(g.wrap(16), 0);
        assert_eq!(g.opposite(3), 11);
        assert_eq!(g.opposite(12), 4);
    }
}
