//! Warping profiles for metrics `g = dr² + h(r)² g_{S^{n-1}}` and the closed-form
//! differential geometry of radial functions on them.
//!
//! Christoffel symbols never appear explicitly: every operator here is the
//! radial specialization of the general coordinate formula. All pointwise
//! operations reject the pole `r = 0`, where `ḣ/h` is only removable.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;

/// Which closed-form warping function a profile uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// `h(r) = r`, flat space.
    Euclidean,
    /// `h(r) = sin r`, the round sphere seen from its north pole.
    Spherical,
    /// `h(r) = sinh r`, hyperbolic space.
    Hyperbolic,
    /// User-supplied `h`, `ḣ`, `ḧ`.
    Custom,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ProfileKind::Euclidean => "euclidean",
            ProfileKind::Spherical => "spherical",
            ProfileKind::Hyperbolic => "hyperbolic",
            ProfileKind::Custom => "custom",
        };
        f.write_str(name)
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
struct CustomWarp {
    h: Arc<ScalarFn>,
    h_dot: Arc<ScalarFn>,
    h_ddot: Arc<ScalarFn>,
}

/// Absolute tolerance of the quadrature used for the primitive of custom profiles.
pub const CUSTOM_PRIMITIVE_TOL: f64 = 1e-12;

/// The warping function `h` of a rotationally symmetric metric, with its first two
/// derivatives, its primitive `H` (normalized by `H(0) = 0`) and the radius bound `r̄`.
#[derive(Clone)]
pub struct WarpingProfile {
    kind: ProfileKind,
    r_max: f64,
    custom: Option<CustomWarp>,
}

impl fmt::Debug for WarpingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingProfile")
            .field("kind", &self.kind)
            .field("r_max", &self.r_max)
            .finish()
    }
}

/// Builds one of the three canonical profiles.
///
/// Spherical profiles must stay inside the open hemisphere, so `r_max ≤ π/2`.
pub fn make_profile(kind: ProfileKind, r_max: f64) -> Result<WarpingProfile> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::invalid("r_max", format!("must be positive and finite, got {r_max}")));
    }
    match kind {
        ProfileKind::Custom => Err(Error::invalid(
            "kind",
            "custom profiles are built with WarpingProfile::custom",
        )),
        ProfileKind::Spherical if r_max > FRAC_PI_2 => Err(Error::invalid(
            "r_max",
            format!("spherical profiles are confined to the hemisphere (r_max ≤ π/2), got {r_max}"),
        )),
        _ => Ok(WarpingProfile {
            kind,
            r_max,
            custom: None,
        }),
    }
}

impl WarpingProfile {
    pub fn euclidean(r_max: f64) -> Result<Self> {
        make_profile(ProfileKind::Euclidean, r_max)
    }

    /// The open hemisphere, `r̄ = π/2`.
    pub fn hemisphere() -> Self {
        make_profile(ProfileKind::Spherical, FRAC_PI_2).expect("π/2 is a valid hemisphere radius")
    }

    pub fn hyperbolic(r_max: f64) -> Result<Self> {
        make_profile(ProfileKind::Hyperbolic, r_max)
    }

    /// A profile from analytic `h`, `ḣ`, `ḧ`. The primitive is evaluated by adaptive
    /// quadrature. `h(0) = 0` and `ḣ > 0` are checked on 1000 sample radii.
    pub fn custom<H, D, DD>(r_max: f64, h: H, h_dot: D, h_ddot: DD) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        DD: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::invalid("r_max", format!("must be positive and finite, got {r_max}")));
        }
        if h(0.0).abs() > 1e-14 {
            return Err(Error::invalid("h", "warping function must vanish at the pole"));
        }
        for k in 0..1000 {
            let r = r_max * k as f64 / 1000.0;
            let d = h_dot(r);
            if !(d > 0.0) {
                return Err(Error::invalid("h_dot", format!("ḣ({r}) = {d} is not positive")));
            }
        }
        Ok(WarpingProfile {
            kind: ProfileKind::Custom,
            r_max,
            custom: Some(CustomWarp {
                h: Arc::new(h),
                h_dot: Arc::new(h_dot),
                h_ddot: Arc::new(h_ddot),
            }),
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// The radius bound `r̄` of the ball carrying the metric.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn h(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Euclidean => r,
            ProfileKind::Spherical => r.sin(),
            ProfileKind::Hyperbolic => r.sinh(),
            ProfileKind::Custom => (self.custom_warp().h)(r),
        }
    }

    pub fn h_dot(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Euclidean => 1.0,
            ProfileKind::Spherical => r.cos(),
            ProfileKind::Hyperbolic => r.cosh(),
            ProfileKind::Custom => (self.custom_warp().h_dot)(r),
        }
    }

    pub fn h_ddot(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Euclidean => 0.0,
            ProfileKind::Spherical => -r.sin(),
            ProfileKind::Hyperbolic => r.sinh(),
            ProfileKind::Custom => (self.custom_warp().h_ddot)(r),
        }
    }

    /// `H(r) = ∫₀ʳ h`.
    pub fn primitive(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Euclidean => 0.5 * r * r,
            // 1 − cos r = 2 sin²(r/2) avoids cancellation near the pole.
            ProfileKind::Spherical => 2.0 * (0.5 * r).sin().powi(2),
            ProfileKind::Hyperbolic => 2.0 * (0.5 * r).sinh().powi(2),
            ProfileKind::Custom => {
                let h = self.custom_warp().h.clone();
                let (lo, hi, sign) = if r >= 0.0 { (0.0, r, 1.0) } else { (r, 0.0, -1.0) };
                sign * quadrature::integrate(|t| h(t), lo, hi, CUSTOM_PRIMITIVE_TOL)
                    .unwrap_or_else(|_| panic!("primitive of custom profile failed at r = {r}"))
            }
        }
    }

    /// `(h, ḣ, ḧ)` at `r`.
    /// `(1 − ḣ²)/h²`, the curvature of planes tangent to the distance spheres. Exact
    /// for the built-in profiles, where the generic expression cancels near `r = 0`.
    fn sphere_curvature(&self, h: f64, h_dot: f64) -> f64 {
        match self.kind {
            ProfileKind::Euclidean => 0.0,
            ProfileKind::Spherical => 1.0,
            ProfileKind::Hyperbolic => -1.0,
            ProfileKind::Custom => (1.0 - h_dot * h_dot) / (h * h),
        }
    }

    pub fn warp_jet(&self, r: f64) -> RadialJet {
        RadialJet::new(self.h(r), self.h_dot(r), self.h_ddot(r))
    }

    /// `(H, h, ḣ)` at `r`.
    pub fn primitive_jet(&self, r: f64) -> RadialJet {
        RadialJet::new(self.primitive(r), self.h(r), self.h_dot(r))
    }

    /// `(h²/2, hḣ, ḣ² + hḧ)` at `r`.
    pub fn half_h_squared_jet(&self, r: f64) -> RadialJet {
        let (h, d, dd) = (self.h(r), self.h_dot(r), self.h_ddot(r));
        RadialJet::new(0.5 * h * h, h * d, d * d + h * dd)
    }

    /// Rejects `r` outside the open interval `(0, r̄)`.
    pub fn check_interior(&self, r: f64) -> Result<()> {
        if r > 0.0 && r < self.r_max {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                r,
                limit: self.r_max,
            })
        }
    }

    fn custom_warp(&self) -> &CustomWarp {
        self.custom.as_ref().expect("custom profile carries its functions")
    }
}

/// Value, first and second derivative of a radial function at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl RadialJet {
    pub fn new(value: f64, first: f64, second: f64) -> Self {
        RadialJet {
            value,
            first,
            second,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.first.is_finite() && self.second.is_finite()
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("n", format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

/// Eigenvalues of the Hessian of a radial function `f`: the radial one `f̈` and the
/// angular one `ḟḣ/h` (with multiplicity `n − 1` in an orthonormal frame).
pub fn radial_hessian(profile: &WarpingProfile, f: &RadialJet, r: f64) -> Result<(f64, f64)> {
    profile.check_interior(r)?;
    Ok((f.second, profile.h_dot(r) * (f.first / profile.h(r))))
}

/// `Δf = f̈ + (n−1)(ḣ/h)ḟ` for a radial function.
pub fn laplacian_radial(profile: &WarpingProfile, n: usize, f: &RadialJet, r: f64) -> Result<f64> {
    check_dimension(n)?;
    let (radial, angular) = radial_hessian(profile, f, r)?;
    Ok(radial + (n - 1) as f64 * angular)
}

/// Divergence of the radial field `φ(r)∂_r`: `φ̇ + (n−1)(ḣ/h)φ`.
pub fn divergence_radial(profile: &WarpingProfile, n: usize, phi: &RadialJet, r: f64) -> Result<f64> {
    check_dimension(n)?;
    profile.check_interior(r)?;
    Ok(phi.first + (n - 1) as f64 * profile.h_dot(r) / profile.h(r) * phi.value)
}

/// `Ric(Du, Du)` for a gradient with radial part `u_r` and squared tangential norm
/// `grad_tan_sq = |Du|² − u_r²`.
///
/// Uses the warped-product curvatures `Ric(∂_r,∂_r) = −(n−1)ḧ/h` and
/// `Ric(e,e) = −ḧ/h + (n−2)(1−ḣ²)/h²` for unit tangential `e`.
pub fn ricci_quadratic(
    profile: &WarpingProfile,
    n: usize,
    r: f64,
    u_r: f64,
    grad_tan_sq: f64,
) -> Result<f64> {
    check_dimension(n)?;
    profile.check_interior(r)?;
    if grad_tan_sq < 0.0 {
        return Err(Error::invalid(
            "grad_tan_sq",
            format!("squared tangential gradient must be non-negative, got {grad_tan_sq}"),
        ));
    }
    let (h, d, dd) = (profile.h(r), profile.h_dot(r), profile.h_ddot(r));
    let radial = -((n - 1) as f64) * dd / h;
    let tangential = -dd / h + (n - 2) as f64 * profile.sphere_curvature(h, d);
    Ok(radial * u_r * u_r + tangential * grad_tan_sq)
}

/// Defect in the Newton inequality, `n Σλᵢ² − (Σλᵢ)²`, for `n` Hessian eigenvalues.
///
/// Evaluated as `Σ_{i<j} (λᵢ − λⱼ)²`, which is the same polynomial, so the result is
/// non-negative in floating point and exactly zero when all eigenvalues agree.
pub fn newton_gap(n: usize, hessian_eigs: &[f64]) -> f64 {
    debug_assert!(n >= 2 && hessian_eigs.len() == n);
    let mut gap = 0.0;
    for (i, a) in hessian_eigs.iter().enumerate() {
        for b in &hessian_eigs[i + 1..] {
            gap += (a - b) * (a - b);
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn canonical() -> Vec<WarpingProfile> {
        vec![
            WarpingProfile::euclidean(10.0).unwrap(),
            WarpingProfile::hemisphere(),
            WarpingProfile::hyperbolic(5.0).unwrap(),
        ]
    }

    #[test]
    fn make_profile_examples() {
        let e = make_profile(ProfileKind::Euclidean, 10.0).unwrap();
        assert_eq!(e.h(1.0), 1.0);
        assert_eq!(e.primitive(1.0), 0.5);

        let s = make_profile(ProfileKind::Spherical, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s.h(FRAC_PI_4), 0.707_106_8, epsilon = 1e-7);
        assert_abs_diff_eq!(s.primitive(FRAC_PI_2), 1.0, epsilon = 1e-15);

        let hy = make_profile(ProfileKind::Hyperbolic, 5.0).unwrap();
        // Composite Simpson on sinh over [0, 1], independent of the closed form.
        let m = 2000;
        let step = 1.0 / m as f64;
        let mut simpson = 0.0;
        for k in 0..=m {
            let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            simpson += w * (k as f64 * step).sinh();
        }
        simpson *= step / 3.0;
        assert_abs_diff_eq!(simpson, 0.543_080_6, epsilon = 1e-7);
        assert_abs_diff_eq!(hy.primitive(1.0), simpson, epsilon = 1e-12);
    }

    #[test]
    fn make_profile_rejects_bad_radii() {
        assert!(make_profile(ProfileKind::Euclidean, 0.0).is_err());
        assert!(make_profile(ProfileKind::Hyperbolic, -1.0).is_err());
        assert!(make_profile(ProfileKind::Spherical, 1.6).is_err());
        assert!(make_profile(ProfileKind::Custom, 1.0).is_err());
    }

    #[test]
    fn curvature_sign_of_second_derivative() {
        for r in [0.1, 0.5, 1.2] {
            let s = WarpingProfile::hemisphere();
            assert_abs_diff_eq!(s.h_ddot(r), -s.h(r), epsilon = 0.0);
            let hy = WarpingProfile::hyperbolic(5.0).unwrap();
            assert_abs_diff_eq!(hy.h_ddot(r), hy.h(r), epsilon = 0.0);
            assert_eq!(WarpingProfile::euclidean(5.0).unwrap().h_ddot(r), 0.0);
        }
    }

    #[test]
    fn primitive_derivative_and_monotonicity() {
        for p in canonical() {
            assert_eq!(p.h(0.0), 0.0);
            assert_eq!(p.primitive(0.0), 0.0);
            let lo = 1e-3;
            let hi = p.r_max() - 1e-3;
            let mut prev = p.primitive(lo);
            for k in 0..1000 {
                let r = lo + (hi - lo) * (k as f64 + 0.5) / 1000.0;
                assert!(p.h_dot(r) > 0.0);
                let step = 1e-5;
                let fd = (p.primitive(r + step) - p.primitive(r - step)) / (2.0 * step);
                let scale = p.h(r).abs().max(1.0);
                assert!((fd - p.h(r)).abs() < 1e-6 * scale, "{:?} r = {r}", p.kind());
                let cur = p.primitive(r);
                assert!(cur > prev);
                prev = cur;
            }
        }
    }

    #[test]
    fn custom_profile_matches_closed_form() {
        let custom =
            WarpingProfile::custom(FRAC_PI_2, f64::sin, f64::cos, |r: f64| -r.sin()).unwrap();
        assert_eq!(custom.kind(), ProfileKind::Custom);
        let sphere = WarpingProfile::hemisphere();
        for r in [0.2, 0.7, 1.3] {
            assert_abs_diff_eq!(custom.primitive(r), sphere.primitive(r), epsilon = 1e-12);
        }
    }

    #[test]
    fn custom_profile_validation() {
        assert!(WarpingProfile::custom(1.0, |r| r + 1.0, |_| 1.0, |_| 0.0).is_err());
        assert!(WarpingProfile::custom(2.0, |r: f64| r.sin(), f64::cos, |r: f64| -r.sin()).is_err());
    }

    #[test]
    fn radial_hessian_examples() {
        let s = WarpingProfile::hemisphere();
        let (a, b) = radial_hessian(&s, &s.primitive_jet(0.7), 0.7).unwrap();
        assert_abs_diff_eq!(a, 0.7f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.7f64.cos(), epsilon = 1e-15);

        let e = WarpingProfile::euclidean(10.0).unwrap();
        let f = RadialJet::new(2.0, 2.0, 1.0);
        assert_eq!(radial_hessian(&e, &f, 2.0).unwrap(), (1.0, 1.0));

        let (a, b) = radial_hessian(&s, &RadialJet::new(FRAC_PI_4, 1.0, 0.0), FRAC_PI_4).unwrap();
        assert_eq!(a, 0.0);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-15);

        assert!(matches!(
            radial_hessian(&s, &f, 0.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(radial_hessian(&s, &f, FRAC_PI_2).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let e = WarpingProfile::euclidean(10.0).unwrap();
        let r: f64 = 1.3;
        let f = RadialJet::new(0.5 * r * r, r, 1.0);
        assert_abs_diff_eq!(laplacian_radial(&e, 3, &f, r).unwrap(), 3.0, epsilon = 1e-15);

        let s = WarpingProfile::hemisphere();
        let lap_h = laplacian_radial(&s, 2, &s.primitive_jet(0.5), 0.5).unwrap();
        assert_abs_diff_eq!(lap_h, 1.755_165_1, epsilon = 1e-7);

        let lap_sq = laplacian_radial(&s, 2, &s.half_h_squared_jet(0.5), 0.5).unwrap();
        assert_abs_diff_eq!(lap_sq, 1.310_453_5, epsilon = 1e-7);

        assert!(laplacian_radial(&s, 2, &f, 0.0).is_err());
        assert!(laplacian_radial(&s, 1, &f, 0.5).is_err());
    }

    #[test]
    fn divergence_examples() {
        let s = WarpingProfile::hemisphere();
        let d = divergence_radial(&s, 2, &s.warp_jet(0.3), 0.3).unwrap();
        assert_abs_diff_eq!(d, 1.910_673_0, epsilon = 1e-7);

        let e = WarpingProfile::euclidean(10.0).unwrap();
        for r in [0.1, 1.0, 7.0] {
            let d = divergence_radial(&e, 4, &RadialJet::new(r, 1.0, 0.0), r).unwrap();
            assert_abs_diff_eq!(d, 4.0, epsilon = 1e-14);
        }

        let r = 0.5;
        let (h, hd) = (s.h(r), s.h_dot(r));
        let phi = RadialJet::new(-0.5 * h.powi(3), -1.5 * h * h * hd, 0.0);
        let d = divergence_radial(&s, 2, &phi, r).unwrap();
        assert_abs_diff_eq!(d, -0.403_422_7, epsilon = 1e-7);

        assert!(divergence_radial(&s, 2, &phi, 0.0).is_err());
    }

    #[test]
    fn ricci_examples() {
        let s = WarpingProfile::hemisphere();
        assert_abs_diff_eq!(ricci_quadratic(&s, 3, 0.4, 1.0, 1.0).unwrap(), 4.0, epsilon = 1e-14);

        let e = WarpingProfile::euclidean(10.0).unwrap();
        assert_eq!(ricci_quadratic(&e, 4, 0.4, 1.7, 2.3).unwrap(), 0.0);

        let hy = WarpingProfile::hyperbolic(5.0).unwrap();
        assert_abs_diff_eq!(ricci_quadratic(&hy, 2, 0.9, 1.0, 0.0).unwrap(), -1.0, epsilon = 1e-14);

        assert!(ricci_quadratic(&s, 2, 0.4, 1.0, -0.1).is_err());
    }

    #[test]
    fn newton_gap_examples() {
        assert_eq!(newton_gap(2, &[1.0, 1.0]), 0.0);
        assert_eq!(newton_gap(2, &[1.0, 0.0]), 1.0);
        assert_eq!(newton_gap(3, &[2.0, 1.0, 0.0]), 6.0);
    }

    #[test]
    fn laplacian_of_primitive_is_n_hdot() {
        for p in canonical() {
            for n in 2..=5 {
                for k in 1..200 {
                    let r = p.r_max().min(3.0) * k as f64 / 200.0;
                    let lap = laplacian_radial(&p, n, &p.primitive_jet(r), r).unwrap();
                    let expect = n as f64 * p.h_dot(r);
                    assert!((lap - expect).abs() <= 4.0 * f64::EPSILON * expect.abs());
                    let div = divergence_radial(&p, n, &p.warp_jet(r), r).unwrap();
                    assert!((div - expect).abs() <= 4.0 * f64::EPSILON * expect.abs());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn newton_gap_nonnegative(eigs in proptest::collection::vec(-10.0f64..10.0, 2..7)) {
            let n = eigs.len();
            let gap = newton_gap(n, &eigs);
            prop_assert!(gap >= 0.0);
            let direct = n as f64 * eigs.iter().map(|x| x * x).sum::<f64>()
                - eigs.iter().sum::<f64>().powi(2);
            prop_assert!((gap - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
            let spread = eigs.iter().cloned().fold(f64::MIN, f64::max)
                - eigs.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert_eq!(gap == 0.0, spread == 0.0);
            if spread < 1e-14 {
                prop_assert!(gap < (n * n) as f64 * 1e-28);
            }
        }

        #[test]
        fn newton_gap_vanishes_on_constant(value in -10.0f64..10.0, n in 2usize..7) {
            prop_assert_eq!(newton_gap(n, &vec![value; n]), 0.0);
        }

        #[test]
        fn spherical_ricci_is_n_minus_one_times_gradient(
            n in 2usize..7,
            r in 1e-3f64..(PI / 2.0 - 1e-3),
            ur in -5.0f64..5.0,
            tan in 0.0f64..25.0,
        ) {
            let s = WarpingProfile::hemisphere();
            let ric = ricci_quadratic(&s, n, r, ur, tan).unwrap();
            let expect = (n - 1) as f64 * (ur * ur + tan);
            prop_assert!((ric - expect).abs() <= 1e-12 * (1.0 + expect));
        }
    }
}
