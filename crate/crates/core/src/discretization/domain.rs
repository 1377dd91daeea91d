use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Number of angles on which domain validity is checked.
pub const VALIDATION_SAMPLES: usize = 4096;

/// Boundary radius as a function of the polar angle.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryShape {
    /// `ρ(θ) = R₀ (1 + Σ_k a_k cos kθ + b_k sin kθ)`, `k = 1..K`.
    Fourier { r0: f64, a: Vec<f64>, b: Vec<f64> },
    /// A flat-space disk of radius `radius` whose center sits at distance `offset`
    /// from the pole along θ = 0: `ρ(θ) = d cos θ + √(R² − d² sin² θ)`.
    OffsetDisk { radius: f64, offset: f64 },
}

/// A domain star-shaped about the pole, `{(r, θ) : r < ρ(θ)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarDomain {
    shape: BoundaryShape,
}

impl StarDomain {
    pub fn disk(r0: f64) -> Result<Self> {
        Self::fourier(r0, Vec::new(), Vec::new())
    }

    /// Truncated Fourier boundary. `a` and `b` hold the coefficients for `k = 1, 2, …`;
    /// the shorter list is padded with zeros.
    pub fn fourier(r0: f64, mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::invalid("R0", format!("mean radius must be positive, got {r0}")));
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("fourier", "coefficients must be finite"));
        }
        let k = a.len().max(b.len());
        a.resize(k, 0.0);
        b.resize(k, 0.0);
        let domain = StarDomain {
            shape: BoundaryShape::Fourier { r0, a, b },
        };
        domain.check_positive()?;
        Ok(domain)
    }

    pub fn offset_disk(radius: f64, offset: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
        }
        if !(offset.abs() < radius) {
            return Err(Error::invalid(
                "d",
                format!("offset {offset} must be smaller than the radius {radius} to keep the pole inside"),
            ));
        }
        Ok(StarDomain {
            shape: BoundaryShape::OffsetDisk { radius, offset },
        })
    }

    pub fn shape(&self) -> &BoundaryShape {
        &self.shape
    }

    /// Whether the boundary is a circle about the pole.
    pub fn is_geodesic_ball(&self) -> bool {
        match &self.shape {
            BoundaryShape::Fourier { a, b, .. } => a.iter().chain(b.iter()).all(|&x| x == 0.0),
            BoundaryShape::OffsetDisk { offset, .. } => *offset == 0.0,
        }
    }

    /// `(ρ, ρ′, ρ″)` at `theta`.
    pub fn rho_jet(&self, theta: f64) -> (f64, f64, f64) {
        match &self.shape {
            BoundaryShape::Fourier { r0, a, b } => {
                let (mut v, mut d1, mut d2) = (1.0, 0.0, 0.0);
                for (idx, (ak, bk)) in a.iter().zip(b).enumerate() {
                    let k = (idx + 1) as f64;
                    let (s, c) = (k * theta).sin_cos();
                    v += ak * c + bk * s;
                    d1 += k * (-ak * s + bk * c);
                    d2 += -k * k * (ak * c + bk * s);
                }
                (r0 * v, r0 * d1, r0 * d2)
            }
            BoundaryShape::OffsetDisk { radius, offset } => {
                let (s, c) = theta.sin_cos();
                let d = *offset;
                let q = (radius * radius - d * d * s * s).sqrt();
                let q1 = -d * d * s * c / q;
                let q2 = (-d * d * (2.0 * theta).cos() - q1 * q1) / q;
                (d * c + q, -d * s + q1, -d * c + q2)
            }
        }
    }

    pub fn rho(&self, theta: f64) -> f64 {
        self.rho_jet(theta).0
    }

    /// Mean boundary radius: `R₀` for Fourier shapes, the angular average otherwise.
    pub fn mean_radius(&self) -> f64 {
        match &self.shape {
            BoundaryShape::Fourier { r0, .. } => *r0,
            BoundaryShape::OffsetDisk { .. } => {
                let m = VALIDATION_SAMPLES;
                (0..m).map(|i| self.rho(2.0 * PI * i as f64 / m as f64)).sum::<f64>() / m as f64
            }
        }
    }

    /// `(min ρ, max ρ)` over the validation angles.
    pub fn radius_range(&self) -> (f64, f64) {
        (0..VALIDATION_SAMPLES)
            .map(|i| self.rho(2.0 * PI * i as f64 / VALIDATION_SAMPLES as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }

    /// Checks `0 < ρ(θ) < r_max` on the validation angles.
    pub fn validate(&self, r_max: f64) -> Result<()> {
        self.check_positive()?;
        let (_, hi) = self.radius_range();
        if !(hi < r_max) {
            return Err(Error::Precondition(format!(
                "domain reaches radius {hi}, beyond the profile bound {r_max}"
            )));
        }
        Ok(())
    }

    fn check_positive(&self) -> Result<()> {
        let (lo, _) = self.radius_range();
        if !(lo > 0.0) {
            return Err(Error::Precondition(format!(
                "boundary radius reaches {lo}; the pole must lie strictly inside the domain"
            )));
        }
        Ok(())
    }

    /// The domain rotated by `phase`: `ρ_new(θ) = ρ(θ − phase)`.
    pub fn rotated(&self, phase: f64) -> StarDomain {
        let shape = match &self.shape {
            BoundaryShape::Fourier { r0, a, b } => {
                let mut na = Vec::with_capacity(a.len());
                let mut nb = Vec::with_capacity(b.len());
                for (idx, (ak, bk)) in a.iter().zip(b).enumerate() {
                    let (s, c) = ((idx + 1) as f64 * phase).sin_cos();
                    na.push(ak * c - bk * s);
                    nb.push(ak * s + bk * c);
                }
                BoundaryShape::Fourier {
                    r0: *r0,
                    a: na,
                    b: nb,
                }
            }
            BoundaryShape::OffsetDisk { .. } => {
                panic!("rotation is only defined for Fourier boundaries")
            }
        };
        StarDomain { shape }
    }

    /// The Fourier domain rotated so that `b₁ = 0` (and `a₁ ≥ 0`).
    pub fn gauge_fixed(&self) -> StarDomain {
        match &self.shape {
            BoundaryShape::Fourier { a, b, .. } if !a.is_empty() && b[0] != 0.0 => {
                // Rotating by φ maps (a₁, b₁) to (a₁cosφ − b₁sinφ, a₁sinφ + b₁cosφ).
                let phase = (-b[0]).atan2(a[0]);
                let mut out = self.rotated(phase);
                if let BoundaryShape::Fourier { b, .. } = &mut out.shape {
                    b[0] = 0.0;
                }
                out
            }
            _ => self.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fourier_jet_matches_finite_differences() {
        let d = StarDomain::fourier(0.8, vec![0.0, 0.05, 0.15], vec![0.02, 0.0, -0.03]).unwrap();
        let eps = 1e-5;
        for k in 0..50 {
            let t = 0.13 * k as f64;
            let (_, d1, d2) = d.rho_jet(t);
            let fd1 = (d.rho(t + eps) - d.rho(t - eps)) / (2.0 * eps);
            let fd2 = (d.rho(t + eps) - 2.0 * d.rho(t) + d.rho(t - eps)) / (eps * eps);
            assert_abs_diff_eq!(d1, fd1, epsilon = 1e-8);
            assert_abs_diff_eq!(d2, fd2, epsilon = 1e-4);
        }
    }

    #[test]
    fn offset_disk_jet_and_geometry() {
        let d = StarDomain::offset_disk(1.0, 0.2).unwrap();
        assert_abs_diff_eq!(d.rho(0.0), 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(d.rho(PI), 0.8, epsilon = 1e-15);
        let eps = 1e-5;
        for k in 0..50 {
            let t = 0.13 * k as f64;
            let (r, d1, d2) = d.rho_jet(t);
            // The boundary point lies on the circle |x − (d, 0)| = R.
            let (x, y) = (r * t.cos() - 0.2, r * t.sin());
            assert_abs_diff_eq!(x * x + y * y, 1.0, epsilon = 1e-13);
            let fd1 = (d.rho(t + eps) - d.rho(t - eps)) / (2.0 * eps);
            let fd2 = (d.rho(t + eps) - 2.0 * r + d.rho(t - eps)) / (eps * eps);
            assert_abs_diff_eq!(d1, fd1, epsilon = 1e-8);
            assert_abs_diff_eq!(d2, fd2, epsilon = 1e-4);
        }
        assert!(StarDomain::offset_disk(1.0, 1.0).is_err());
    }

    #[test]
    fn validation() {
        let d = StarDomain::fourier(0.8, vec![0.0, 0.0, 0.15], vec![]).unwrap();
        assert!(d.validate(PI / 2.0).is_ok());
        let (_, hi) = d.radius_range();
        assert_abs_diff_eq!(hi, 0.92, epsilon = 1e-12);
        assert!(StarDomain::disk(2.0).unwrap().validate(PI / 2.0).is_err());
        assert!(StarDomain::fourier(1.0, vec![1.2], vec![]).is_err());
        assert!(StarDomain::disk(-1.0).is_err());
    }

    #[test]
    fn rotation_shifts_boundary() {
        let d = StarDomain::fourier(1.0, vec![0.1, 0.05, 0.02], vec![0.03, -0.04, 0.0]).unwrap();
        let phase = 0.7;
        let rot = d.rotated(phase);
        for k in 0..20 {
            let t = 0.31 * k as f64;
            assert_abs_diff_eq!(rot.rho(t), d.rho(t - phase), epsilon = 1e-14);
        }
        let g = d.gauge_fixed();
        if let BoundaryShape::Fourier { a, b, .. } = g.shape() {
            assert_eq!(b[0], 0.0);
            assert!(a[0] > 0.0);
        }
        let (lo, hi) = d.radius_range();
        let (glo, ghi) = g.radius_range();
        assert_abs_diff_eq!(lo, glo, epsilon = 1e-5);
        assert_abs_diff_eq!(hi, ghi, epsilon = 1e-5);
    }
}
