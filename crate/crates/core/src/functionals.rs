//! Integral quantities of the torsion problem and the identities relating them.
//!
//! A [`FunctionalCatalog`] collects every integral that appears in the Pohožaev and
//! Bochner–Weitzenböck arguments, computed either from a discrete solve or from the
//! closed-form radial solution. [`identity_report`] then checks each identity under
//! the boundary hypotheses it needs: some hold for any function, some only use
//! `u = 0` on the boundary, and the rest also need a constant Neumann trace.

use std::fmt;

use crate::closed_form::{radial_functionals, RadialSolution};
use crate::discretization::{boundary_samples, gradient_field, integrate, DiscreteField};
use crate::error::{Error, Result};
use crate::geometry::{ricci_quadratic, ProfileKind, WarpingProfile};

/// A constant-Neumann identity is evaluated only when `c_std / c_mean` is below this.
pub const NEUMANN_SPREAD_THRESHOLD: f64 = 1e-2;

/// Floor of the denominator in relative residuals.
pub const RELATIVE_FLOOR: f64 = 1e-30;

/// Building blocks of the catalog. All volume integrals use the Riemannian volume form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RawIntegrals {
    pub n: usize,
    pub bdry_measure: f64,
    pub int_hdot: f64,
    pub int_hdot_gradsq: f64,
    pub lhs_bw: f64,
    pub int_negu_gradsq: f64,
    pub int_negu_h_ur: f64,
    pub int_negu_hdot_sq: f64,
    pub int_negu_ur_hddot: f64,
    pub int_negu_h_hddot: f64,
    pub int_negu_hsq: f64,
    pub int_ur_h_hdot: f64,
    pub int_negu_ricci: f64,
    pub newton_int: f64,
    pub pohozaev_flux: f64,
    pub pohozaev_bulk: f64,
    pub c_mean: f64,
    pub c_std: f64,
}

/// Named integral quantities of a torsion solution.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalCatalog {
    pub n: usize,
    /// `|∂Ω|`
    pub bdry_measure: f64,
    /// `∫ ḣ`
    pub int_hdot: f64,
    /// `∫ ḣ|Du|²`
    pub int_hdot_gradsq: f64,
    /// `½∫(−u)Δ|Du|²`
    pub lhs_bw: f64,
    /// `n∫−uḣ² + n∫−u u_r ḧ + ∫−u Ric(Du,Du)`
    pub rhs_bw2: f64,
    /// `n∫−uḣ² + n∫−u h ḧ − (n−1)∫−u u_r ḧ`
    pub rhs_left2: f64,
    /// `∫−u|Du|²`
    pub quelo_left: f64,
    /// `∫−u h u_r`
    pub quelo_right: f64,
    /// `∫−u(|Du|² − h²)`
    pub seconda: f64,
    /// `c²∫ḣ`
    pub eq18_left: f64,
    /// `∫−u((n+2)ḣ² + 2hḧ) − (n−2)/n ∫−u u_r ḧ`
    pub eq18_right: f64,
    /// `∫−u(|∇²u|² − (Δu)²/n)`
    pub newton_int: f64,
    /// `∫_{∂Ω} ½|Du|² g(X,ν) − h u_r ∂_ν u`
    pub pohozaev_flux: f64,
    /// `∫_Ω (n−2)/2 ḣ|Du|² − h u_r Δu`
    pub pohozaev_bulk: f64,
    pub c_mean: f64,
    pub c_std: f64,
    /// `∫−u ḣ²`
    pub int_negu_hdot_sq: f64,
    /// `∫−u u_r ḧ`
    pub int_negu_ur_hddot: f64,
    /// `∫−u h ḧ`
    pub int_negu_h_hddot: f64,
    /// `∫−u h²`
    pub int_negu_hsq: f64,
    /// `∫ u_r h ḣ`
    pub int_ur_h_hdot: f64,
    /// `∫−u Ric(Du,Du)`
    pub int_negu_ricci: f64,
}

impl FunctionalCatalog {
    pub(crate) fn from_integrals(raw: RawIntegrals) -> Self {
        let nf = raw.n as f64;
        let (a, b, c) = (raw.int_negu_hdot_sq, raw.int_negu_ur_hddot, raw.int_negu_h_hddot);
        FunctionalCatalog {
            n: raw.n,
            bdry_measure: raw.bdry_measure,
            int_hdot: raw.int_hdot,
            int_hdot_gradsq: raw.int_hdot_gradsq,
            lhs_bw: raw.lhs_bw,
            rhs_bw2: nf * a + nf * b + raw.int_negu_ricci,
            rhs_left2: nf * a + nf * c - (nf - 1.0) * b,
            quelo_left: raw.int_negu_gradsq,
            quelo_right: raw.int_negu_h_ur,
            seconda: raw.int_negu_gradsq - raw.int_negu_hsq,
            eq18_left: raw.c_mean * raw.c_mean * raw.int_hdot,
            eq18_right: (nf + 2.0) * a + 2.0 * c - (nf - 2.0) / nf * b,
            newton_int: raw.newton_int,
            pohozaev_flux: raw.pohozaev_flux,
            pohozaev_bulk: raw.pohozaev_bulk,
            c_mean: raw.c_mean,
            c_std: raw.c_std,
            int_negu_hdot_sq: a,
            int_negu_ur_hddot: b,
            int_negu_h_hddot: c,
            int_negu_hsq: raw.int_negu_hsq,
            int_ur_h_hdot: raw.int_ur_h_hdot,
            int_negu_ricci: raw.int_negu_ricci,
        }
    }

    /// `lhs_bw − rhs_bw2`; non-negative whenever the Newton inequality holds pointwise.
    pub fn bw2_gap(&self) -> f64 {
        self.lhs_bw - self.rhs_bw2
    }

    /// `|∂Ω| − (n/c)∫ḣ` with `c = c_mean`.
    pub fn eq17_residual(&self) -> f64 {
        self.bdry_measure - self.n as f64 / self.c_mean * self.int_hdot
    }

    /// `n∫−uḣ² + ∫−u u_r ḧ`, the right side of the `∫ḣ|Du|²` identity.
    pub fn eq20_right(&self) -> f64 {
        self.n as f64 * self.int_negu_hdot_sq + self.int_negu_ur_hddot
    }

    /// `c³/2 |∂Ω| − (n/2)∫ḣ|Du|²`.
    pub fn left_right(&self) -> f64 {
        0.5 * self.c_mean.powi(3) * self.bdry_measure - 0.5 * self.n as f64 * self.int_hdot_gradsq
    }

    /// `−(c²n/2)∫ḣ`.
    pub fn x_left(&self) -> f64 {
        -0.5 * self.c_mean * self.c_mean * self.n as f64 * self.int_hdot
    }

    /// `(n−2)/2 ∫(−unḣ² − u u_r ḧ) − n∫u_r h ḣ`.
    pub fn x_right(&self) -> f64 {
        let nf = self.n as f64;
        0.5 * (nf - 2.0) * self.eq20_right() - nf * self.int_ur_h_hdot
    }

    /// `c_std / c_mean`.
    pub fn neumann_spread(&self) -> f64 {
        self.c_std / self.c_mean.abs()
    }

    /// Catalog entries as `(name, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("n", self.n as f64),
            ("bdry_measure", self.bdry_measure),
            ("int_hdot", self.int_hdot),
            ("int_hdot_gradsq", self.int_hdot_gradsq),
            ("lhs_bw", self.lhs_bw),
            ("rhs_bw2", self.rhs_bw2),
            ("rhs_left2", self.rhs_left2),
            ("bw2_gap", self.bw2_gap()),
            ("quelo_left", self.quelo_left),
            ("quelo_right", self.quelo_right),
            ("seconda", self.seconda),
            ("eq18_left", self.eq18_left),
            ("eq18_right", self.eq18_right),
            ("newton_int", self.newton_int),
            ("pohozaev_flux", self.pohozaev_flux),
            ("pohozaev_bulk", self.pohozaev_bulk),
            ("c_mean", self.c_mean),
            ("c_std", self.c_std),
            ("int_negu_hdot_sq", self.int_negu_hdot_sq),
            ("int_negu_ur_hddot", self.int_negu_ur_hddot),
            ("int_negu_h_hddot", self.int_negu_h_hddot),
            ("int_negu_hsq", self.int_negu_hsq),
            ("int_ur_h_hdot", self.int_ur_h_hdot),
            ("int_negu_ricci", self.int_negu_ricci),
        ]
    }
}

/// What a catalog is computed from.
#[derive(Debug, Clone, Copy)]
pub enum CatalogInput<'a> {
    Discrete(&'a DiscreteField),
    Radial(&'a RadialSolution),
}

impl<'a> From<&'a DiscreteField> for CatalogInput<'a> {
    fn from(u: &'a DiscreteField) -> Self {
        CatalogInput::Discrete(u)
    }
}

impl<'a> From<&'a RadialSolution> for CatalogInput<'a> {
    fn from(sol: &'a RadialSolution) -> Self {
        CatalogInput::Radial(sol)
    }
}

pub fn compute_catalog<'a>(input: impl Into<CatalogInput<'a>>) -> Result<FunctionalCatalog> {
    match input.into() {
        CatalogInput::Discrete(u) => discrete_catalog(u),
        CatalogInput::Radial(sol) => radial_functionals(sol),
    }
}

/// Catalog of a solved two-dimensional field.
///
/// `½∫(−u)Δ|Du|²` is evaluated as `½∫g(Du, D|Du|²) = ∫∇²u(Du, Du)`, which needs only
/// second derivatives and is valid because `u` vanishes on the boundary.
fn discrete_catalog(u: &DiscreteField) -> Result<FunctionalCatalog> {
    let n = u.dimension();
    let nf = n as f64;
    let grid = u.grid();
    let profile = u.profile();
    let derivs = gradient_field(u);
    let nt = grid.ntheta();

    let mut cols: [Vec<f64>; 14] = Default::default();
    for col in cols.iter_mut() {
        col.reserve(grid.len());
    }
    for (k, d) in derivs.nodes.iter().enumerate() {
        let r = grid.radius(k / nt, k % nt);
        let (h, hd, hdd) = (profile.h(r), profile.h_dot(r), profile.h_ddot(r));
        let neg_u = -u.values()[k];
        let lap = d.laplacian();
        let ric = ricci_quadratic(profile, n, r, d.u_r, d.u_t * d.u_t)?;
        let row = [
            hd,
            hd * d.grad_sq,
            d.hessian_on_gradient(),
            neg_u * d.grad_sq,
            neg_u * h * d.u_r,
            neg_u * hd * hd,
            neg_u * d.u_r * hdd,
            neg_u * h * hdd,
            neg_u * h * h,
            d.u_r * h * hd,
            neg_u * ric,
            neg_u * (d.hessian_norm_sq() - lap * lap / nf),
            0.5 * (nf - 2.0) * hd * d.grad_sq - h * d.u_r * lap,
            0.0,
        ];
        for (col, v) in cols.iter_mut().zip(row) {
            col.push(v);
        }
    }
    let ints: Vec<f64> = cols[..13].iter().map(|c| integrate(c, u)).collect();

    let boundary = boundary_samples(u);
    let bdry_measure: f64 = boundary.iter().map(|b| b.weight).sum();
    let c_mean = boundary.iter().map(|b| b.weight * b.normal_derivative).sum::<f64>() / bdry_measure;
    let c_var = boundary
        .iter()
        .map(|b| b.weight * (b.normal_derivative - c_mean).powi(2))
        .sum::<f64>()
        / bdry_measure;
    let pohozaev_flux = boundary
        .iter()
        .map(|b| {
            let grad_sq = b.u_r * b.u_r + b.u_t * b.u_t;
            b.weight * (0.5 * grad_sq * b.h * b.normal_r - b.h * b.u_r * b.normal_derivative)
        })
        .sum();

    Ok(FunctionalCatalog::from_integrals(RawIntegrals {
        n,
        bdry_measure,
        int_hdot: ints[0],
        int_hdot_gradsq: ints[1],
        lhs_bw: ints[2],
        int_negu_gradsq: ints[3],
        int_negu_h_ur: ints[4],
        int_negu_hdot_sq: ints[5],
        int_negu_ur_hddot: ints[6],
        int_negu_h_hddot: ints[7],
        int_negu_hsq: ints[8],
        int_ur_h_hdot: ints[9],
        int_negu_ricci: ints[10],
        newton_int: ints[11],
        pohozaev_bulk: ints[12],
        pohozaev_flux,
        c_mean,
        c_std: c_var.sqrt(),
    }))
}

/// Boundary conditions an identity relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisClass {
    AnyU,
    DirichletOnly,
    DirichletAndConstantNeumann,
}

impl fmt::Display for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HypothesisClass::AnyU => "any_u",
            HypothesisClass::DirichletOnly => "dirichlet_only",
            HypothesisClass::DirichletAndConstantNeumann => "dirichlet_and_constant_neumann",
        })
    }
}

/// How `lhs` and `rhs` are supposed to compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    GreaterEqual,
    LessEqual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not_applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRecord {
    pub label: &'static str,
    pub hypothesis_class: HypothesisClass,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub verdict: Verdict,
}

impl IdentityRecord {
    /// Signed gap in the direction the relation requires; non-negative when it holds.
    /// Equalities report `lhs − rhs`.
    pub fn signed_gap(&self) -> f64 {
        match self.relation {
            Relation::Equal | Relation::GreaterEqual => self.lhs - self.rhs,
            Relation::LessEqual => self.rhs - self.lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub records: Vec<IdentityRecord>,
    pub tolerance: f64,
    pub neumann_spread: f64,
}

impl IdentityReport {
    pub fn get(&self, label: &str) -> Option<&IdentityRecord> {
        self.records.iter().find(|r| r.label == label)
    }

    /// No record failed; not-applicable records do not count.
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.verdict != Verdict::Fail)
    }
}

/// One record per identity, each with its hypothesis class.
///
/// Equalities pass when `rel_residual ≤ tolerance`. Inequalities pass when the signed
/// gap divided by `max(|lhs|, |rhs|)` is at least `−tolerance`. Constant-Neumann
/// records are marked not applicable when `c_std/c_mean ≥ NEUMANN_SPREAD_THRESHOLD`.
pub fn identity_report(catalog: &FunctionalCatalog, tolerance: f64) -> IdentityReport {
    use HypothesisClass::*;
    use Relation::*;
    let spread = catalog.neumann_spread();
    let neumann_ok = spread < NEUMANN_SPREAD_THRESHOLD;
    let specs: [(&'static str, HypothesisClass, Relation, f64, f64); 10] = [
        ("identity1", AnyU, Equal, catalog.pohozaev_bulk, catalog.pohozaev_flux),
        ("quelo", DirichletOnly, Equal, catalog.quelo_left, catalog.quelo_right),
        ("eq20", DirichletOnly, Equal, catalog.int_hdot_gradsq, catalog.eq20_right()),
        ("eq17", DirichletAndConstantNeumann, Equal, catalog.bdry_measure, catalog.n as f64 / catalog.c_mean * catalog.int_hdot),
        ("eq18", DirichletAndConstantNeumann, Equal, catalog.eq18_left, catalog.eq18_right),
        ("left", DirichletAndConstantNeumann, Equal, catalog.lhs_bw, catalog.left_right()),
        ("left2", DirichletAndConstantNeumann, Equal, catalog.lhs_bw, catalog.rhs_left2),
        ("x", DirichletAndConstantNeumann, Equal, catalog.x_left(), catalog.x_right()),
        ("bw2", DirichletAndConstantNeumann, GreaterEqual, catalog.lhs_bw, catalog.rhs_bw2),
        ("seconda", DirichletOnly, LessEqual, catalog.quelo_left, catalog.int_negu_hsq),
    ];
    let records = specs
        .into_iter()
        .map(|(label, class, relation, lhs, rhs)| {
            let abs_residual = (lhs - rhs).abs();
            let scale = lhs.abs().max(rhs.abs()).max(RELATIVE_FLOOR);
            let rel_residual = abs_residual / scale;
            let mut record = IdentityRecord {
                label,
                hypothesis_class: class,
                relation,
                lhs,
                rhs,
                abs_residual,
                rel_residual,
                verdict: Verdict::Pass,
            };
            record.verdict = if class == DirichletAndConstantNeumann && !neumann_ok {
                Verdict::NotApplicable
            } else {
                let ok = match relation {
                    Equal => rel_residual <= tolerance,
                    _ => record.signed_gap() / scale >= -tolerance,
                };
                if ok {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            };
            record
        })
        .collect();
    IdentityReport {
        records,
        tolerance,
        neumann_spread: spread,
    }
}

/// On the sphere (`ḧ = −h`, `Ric = (n−1)g`) the two integral identities turn the
/// Bochner–Weitzenböck gap into `n(∫−u|Du|² − ∫−uh²)`. Returns the difference of the
/// two sides, which vanishes whenever both identities hold.
pub fn sphere_reduction_check(catalog: &FunctionalCatalog, profile: &WarpingProfile) -> Result<f64> {
    if profile.kind() != ProfileKind::Spherical {
        return Err(Error::Precondition(format!(
            "sphere reduction needs a spherical profile, got {}",
            profile.kind()
        )));
    }
    let n = catalog.n as f64;
    Ok(catalog.bw2_gap() - n * (catalog.quelo_left - catalog.int_negu_hsq))
}

/// `Δu / cos r` at every node: the Laplacian of the conformal metric `cos(r)·g` applied
/// to a two-dimensional field on the hemisphere.
pub fn conformal_check(u: &DiscreteField) -> Result<Vec<f64>> {
    if u.profile().kind() != ProfileKind::Spherical {
        return Err(Error::Precondition(format!(
            "conformal check needs a spherical profile, got {}",
            u.profile().kind()
        )));
    }
    if u.dimension() != 2 {
        return Err(Error::Precondition("conformal check is two-dimensional".into()));
    }
    let grid = u.grid();
    let derivs = gradient_field(u);
    derivs
        .nodes
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let r = grid.radius(k / grid.ntheta(), k % grid.ntheta());
            let conformal = r.cos();
            if conformal < 1e-6 {
                return Err(Error::Precondition(format!("node at r = {r} is too close to the equator")));
            }
            Ok(d.laplacian() / conformal)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::radial_torsion_solution;
    use crate::discretization::{solve_torsion, SolverOptions, StarDomain};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn radial_catalog_examples() {
        let s = radial_torsion_solution(&WarpingProfile::hemisphere(), 2, FRAC_PI_4).unwrap();
        let cat = compute_catalog(&s).unwrap();
        assert_abs_diff_eq!(cat.lhs_bw, PI / 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(cat.rhs_left2, PI / 8.0, epsilon = 1e-9);
        assert!(cat.bw2_gap().abs() < 1e-9);

        let e = radial_torsion_solution(&WarpingProfile::euclidean(10.0).unwrap(), 2, 1.0).unwrap();
        let cat = compute_catalog(&e).unwrap();
        assert!(cat.eq17_residual().abs() < 1e-12);
        assert_abs_diff_eq!(cat.bdry_measure, 2.0 * PI, epsilon = 1e-14);
    }

    #[test]
    fn euclidean_bw2_and_left2_coincide() {
        for radius in [0.5, 1.0, 3.0] {
            let e = radial_torsion_solution(&WarpingProfile::euclidean(10.0).unwrap(), 3, radius).unwrap();
            let cat = compute_catalog(&e).unwrap();
            // ḧ = 0 and Ric = 0 make both right sides n∫−uḣ².
            assert!((cat.rhs_bw2 - cat.rhs_left2).abs() <= 1e-13 * cat.rhs_bw2.abs());
            let report = identity_report(&cat, 1e-8);
            assert!(report.all_pass());
            assert!(report.get("bw2").unwrap().abs_residual < 1e-8);
        }
    }

    #[test]
    fn report_on_radial_ball_passes_everything() {
        for p in [WarpingProfile::hemisphere(), WarpingProfile::hyperbolic(5.0).unwrap()] {
            let s = radial_torsion_solution(&p, 2, 0.6).unwrap();
            let report = identity_report(&compute_catalog(&s).unwrap(), 1e-8);
            assert_eq!(report.records.len(), 10);
            assert!(report.all_pass(), "{report:#?}");
            assert!(report.records.iter().all(|r| r.verdict == Verdict::Pass));
        }
    }

    #[test]
    fn sphere_reduction_on_balls() {
        for (n, radius) in [(2, FRAC_PI_4), (3, 0.6)] {
            let s = radial_torsion_solution(&WarpingProfile::hemisphere(), n, radius).unwrap();
            let cat = compute_catalog(&s).unwrap();
            assert!(sphere_reduction_check(&cat, s.profile()).unwrap().abs() < 1e-8);
        }
        let e = radial_torsion_solution(&WarpingProfile::euclidean(3.0).unwrap(), 2, 1.0).unwrap();
        assert!(sphere_reduction_check(&compute_catalog(&e).unwrap(), e.profile()).is_err());
    }

    /// The sphere reduction is algebra on top of the left2 and quelo identities; feed it
    /// a synthetic catalog where both hold and the gap is non-zero.
    #[test]
    fn sphere_reduction_algebra() {
        let n = 3usize;
        let nf = n as f64;
        let (a, hsq, grad) = (0.7, 0.4, 0.55);
        // Sphere: ḧ = −h, so ∫−u u_r ḧ = −∫−u h u_r and ∫−u h ḧ = −∫−u h².
        let quelo = grad;
        let raw = RawIntegrals {
            n,
            bdry_measure: 1.0,
            int_hdot: 1.0,
            int_hdot_gradsq: 1.0,
            lhs_bw: nf * a - nf * hsq + (nf - 1.0) * quelo,
            int_negu_gradsq: grad,
            int_negu_h_ur: quelo,
            int_negu_hdot_sq: a,
            int_negu_ur_hddot: -quelo,
            int_negu_h_hddot: -hsq,
            int_negu_hsq: hsq,
            int_ur_h_hdot: 0.0,
            int_negu_ricci: (nf - 1.0) * grad,
            newton_int: 0.0,
            pohozaev_flux: 0.0,
            pohozaev_bulk: 0.0,
            c_mean: 1.0,
            c_std: 0.0,
        };
        let cat = FunctionalCatalog::from_integrals(raw);
        assert_abs_diff_eq!(cat.lhs_bw, cat.rhs_left2, epsilon = 1e-15);
        let gap = cat.bw2_gap();
        assert!(gap.abs() > 0.1);
        let check = sphere_reduction_check(&cat, &WarpingProfile::hemisphere()).unwrap();
        assert_abs_diff_eq!(check, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn generic_domain_tags_constant_neumann_rows() {
        let d = StarDomain::fourier(0.8, vec![0.0, 0.0, 0.15], vec![]).unwrap();
        let u = solve_torsion(&WarpingProfile::hemisphere(), &d, 64, 128, SolverOptions::default()).unwrap();
        let cat = compute_catalog(&u).unwrap();
        let report = identity_report(&cat, 1e-2);
        for r in &report.records {
            match r.hypothesis_class {
                HypothesisClass::DirichletAndConstantNeumann => {
                    assert_eq!(r.verdict, Verdict::NotApplicable, "{}", r.label)
                }
                _ => assert_eq!(r.verdict, Verdict::Pass, "{} {r:?}", r.label),
            }
        }
        assert!(cat.newton_int > 0.0);
        assert!(cat.seconda < 0.0);
    }

    #[test]
    fn discrete_ball_report() {
        let d = StarDomain::disk(FRAC_PI_4).unwrap();
        let u = solve_torsion(&WarpingProfile::hemisphere(), &d, 64, 128, SolverOptions::default()).unwrap();
        let cat = compute_catalog(&u).unwrap();
        let report = identity_report(&cat, 1e-2);
        assert!(report.records.iter().all(|r| r.verdict == Verdict::Pass), "{report:#?}");
        assert!(cat.seconda.abs() < 1e-3);
        assert!(cat.bw2_gap().abs() < 1e-3);
        // Cross-check of lhs_bw through the boundary formula.
        assert!((cat.lhs_bw - cat.left_right()).abs() < 1e-3);
    }

    #[test]
    fn conformal_check_on_solution() {
        let d = StarDomain::disk(FRAC_PI_4).unwrap();
        let u = solve_torsion(&WarpingProfile::hemisphere(), &d, 32, 64, SolverOptions::default()).unwrap();
        let vals = conformal_check(&u).unwrap();
        assert!(vals.iter().all(|v| (v - 2.0).abs() < 5e-3));

        let e = solve_torsion(&WarpingProfile::euclidean(5.0).unwrap(), &StarDomain::disk(1.0).unwrap(), 16, 32, SolverOptions::default()).unwrap();
        assert!(conformal_check(&e).is_err());
    }

    #[test]
    fn analytic_conformal_laplacian() {
        let s = radial_torsion_solution(&WarpingProfile::hemisphere(), 2, FRAC_PI_4).unwrap();
        for k in 1..50 {
            let r = FRAC_PI_4 * k as f64 / 50.0;
            assert_abs_diff_eq!(s.laplacian(r).unwrap() / r.cos(), 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn relative_residual_floor() {
        let s = radial_torsion_solution(&WarpingProfile::hemisphere(), 2, FRAC_PI_4).unwrap();
        let mut cat = compute_catalog(&s).unwrap();
        cat.quelo_left = 0.0;
        cat.quelo_right = 0.0;
        let report = identity_report(&cat, 1e-8);
        let q = report.get("quelo").unwrap();
        assert_eq!(q.rel_residual, 0.0);
        assert_eq!(q.verdict, Verdict::Pass);
    }
}
