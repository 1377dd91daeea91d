//! Shape experiments: how far the Neumann trace of the torsion function is from
//! constant, and a derivative-free search for shapes where it is constant.
//!
//! The objective is the arclength-weighted variance of `∂_ν u` on the boundary divided
//! by the squared mean, `J = Var_w(∂_ν u) / c̄²`. On the hemisphere only geodesic balls
//! about the pole have `J = 0`; in flat space every disk does, wherever its center.

use std::fmt;

use rayon::prelude::*;

use crate::discretization::{neumann_trace, solve_torsion, BoundaryShape, SolverOptions, StarDomain};
use crate::error::{Error, Result};
use crate::geometry::{ProfileKind, WarpingProfile};

/// Normalized Neumann deviation of one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeObjective {
    pub j: f64,
    pub c_mean: f64,
    pub c_std: f64,
    pub domain: StarDomain,
    pub ns: usize,
    pub ntheta: usize,
    pub profile: ProfileKind,
}

/// Solves the Dirichlet problem on `domain` and measures its Neumann trace.
pub fn neumann_deviation(
    domain: &StarDomain,
    profile: &WarpingProfile,
    ns: usize,
    ntheta: usize,
) -> Result<ShapeObjective> {
    neumann_deviation_with(domain, profile, ns, ntheta, SolverOptions::default())
}

pub fn neumann_deviation_with(
    domain: &StarDomain,
    profile: &WarpingProfile,
    ns: usize,
    ntheta: usize,
    options: SolverOptions,
) -> Result<ShapeObjective> {
    let u = solve_torsion(profile, domain, ns, ntheta, options)?;
    let (c_mean, c_std) = neumann_trace(&u).statistics();
    Ok(ShapeObjective {
        j: (c_std / c_mean).powi(2),
        c_mean,
        c_std,
        domain: domain.clone(),
        ns,
        ntheta,
        profile: profile.kind(),
    })
}

/// Largest number of Fourier modes the optimizer accepts.
pub const MAX_MODES: usize = 8;

/// Smallest evaluation budget the optimizer accepts.
pub const MIN_BUDGET: usize = 50;

/// Settings of [`optimize_shape_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Stop as soon as the best `J` is at or below this.
    pub target: f64,
    /// Initial simplex edge: relative for `R₀`, absolute for the mode coefficients.
    pub initial_step: f64,
    /// Stop when the simplex diameter and the spread of its values both fall below these.
    pub x_tol: f64,
    pub f_tol: f64,
    pub solver: SolverOptions,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            target: 1e-8,
            initial_step: 0.05,
            x_tol: 1e-7,
            f_tol: 1e-12,
            solver: SolverOptions::default(),
        }
    }
}

/// Simplex move that produced an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Initial => "initial",
            StepKind::Reflect => "reflect",
            StepKind::Expand => "expand",
            StepKind::ContractOutside => "contract_outside",
            StepKind::ContractInside => "contract_inside",
            StepKind::Shrink => "shrink",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetReached,
    Converged,
    BudgetExhausted,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::TargetReached => "target_reached",
            Termination::Converged => "converged",
            Termination::BudgetExhausted => "budget_exhausted",
        })
    }
}

/// One row of the optimization history, recorded after every simplex iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub evaluations: usize,
    pub step: StepKind,
    /// Best `J` so far.
    pub j: f64,
    /// Coefficients of the best shape so far: `R₀`, `a₁..a_K`, `b₁..b_K` with `b₁ = 0`.
    pub r0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Largest distance from the best vertex to another vertex.
    pub simplex_diameter: f64,
    /// `max J − min J` over the simplex.
    pub value_spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    pub best: StarDomain,
    pub best_j: f64,
    pub evaluations: usize,
    pub termination: Termination,
}

/// [`optimize_shape_with`] with default options.
pub fn optimize_shape(
    initial: &StarDomain,
    modes: usize,
    profile: &WarpingProfile,
    budget: usize,
    ns: usize,
    ntheta: usize,
) -> Result<OptimizationTrace> {
    optimize_shape_with(initial, modes, profile, budget, ns, ntheta, OptimizeOptions::default())
}

/// Nelder–Mead over `(R₀, a₁..a_K, b₂..b_K)`; `b₁` is pinned to zero to remove the
/// rotation direction. Coefficients of `initial` above mode `K` are dropped.
///
/// Shapes that leave the admissible region, or whose solve fails, score `J = ∞`.
/// Running out of budget is reported in the trace, not as an error.
pub fn optimize_shape_with(
    initial: &StarDomain,
    modes: usize,
    profile: &WarpingProfile,
    budget: usize,
    ns: usize,
    ntheta: usize,
    options: OptimizeOptions,
) -> Result<OptimizationTrace> {
    if modes == 0 || modes > MAX_MODES {
        return Err(Error::invalid("K", format!("need 1 ≤ K ≤ {MAX_MODES}, got {modes}")));
    }
    if budget < MIN_BUDGET {
        return Err(Error::invalid("budget", format!("need at least {MIN_BUDGET} evaluations, got {budget}")));
    }
    let start = match initial.gauge_fixed().shape() {
        BoundaryShape::Fourier { r0, a, b } => {
            let mut x = vec![*r0];
            x.extend((0..modes).map(|k| a.get(k).copied().unwrap_or(0.0)));
            x.extend((1..modes).map(|k| b.get(k).copied().unwrap_or(0.0)));
            x
        }
        BoundaryShape::OffsetDisk { .. } => {
            return Err(Error::invalid("initial", "the optimizer works on Fourier boundaries"))
        }
    };
    // Fails early on an inadmissible start instead of returning a trace of infinities.
    domain_from(&start, modes)?.validate(profile.r_max())?;

    let mut search = Search {
        profile,
        modes,
        ns,
        ntheta,
        solver: options.solver,
        budget,
        evaluations: 0,
    };
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut records = Vec::new();

    let f0 = search.eval(&start).expect("budget covers the first evaluation");
    simplex.push((start.clone(), f0));
    let mut termination = None;
    if f0 <= options.target {
        termination = Some(Termination::TargetReached);
    } else {
        for k in 0..dim {
            let mut x = start.clone();
            x[k] += if k == 0 { options.initial_step * start[0] } else { options.initial_step };
            let f = search.eval(&x).expect("budget covers the initial simplex");
            simplex.push((x, f));
        }
    }
    sort(&mut simplex);
    records.push(record(0, &search, StepKind::Initial, &simplex, modes));

    let mut iteration = 0;
    while termination.is_none() {
        if simplex[0].1 <= options.target {
            termination = Some(Termination::TargetReached);
            break;
        }
        let (diameter, spread) = extent(&simplex);
        if diameter <= options.x_tol && spread <= options.f_tol {
            termination = Some(Termination::Converged);
            break;
        }
        iteration += 1;
        match nelder_mead_step(&mut simplex, &mut search) {
            Some(step) => {
                sort(&mut simplex);
                records.push(record(iteration, &search, step, &simplex, modes));
            }
            None => termination = Some(Termination::BudgetExhausted),
        }
    }
    sort(&mut simplex);
    Ok(OptimizationTrace {
        records,
        best: domain_from(&simplex[0].0, modes)?,
        best_j: simplex[0].1,
        evaluations: search.evaluations,
        termination: termination.expect("loop exits with a reason"),
    })
}

struct Search<'a> {
    profile: &'a WarpingProfile,
    modes: usize,
    ns: usize,
    ntheta: usize,
    solver: SolverOptions,
    budget: usize,
    evaluations: usize,
}

impl Search<'_> {
    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.evaluations >= self.budget {
            return None;
        }
        self.evaluations += 1;
        let j = domain_from(x, self.modes)
            .and_then(|d| neumann_deviation_with(&d, self.profile, self.ns, self.ntheta, self.solver))
            .map(|o| o.j)
            .unwrap_or(f64::INFINITY);
        Some(if j.is_nan() { f64::INFINITY } else { j })
    }
}

fn domain_from(x: &[f64], modes: usize) -> Result<StarDomain> {
    let a = x[1..=modes].to_vec();
    let mut b = vec![0.0];
    b.extend_from_slice(&x[modes + 1..]);
    StarDomain::fourier(x[0], a, b)
}

fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
}

fn extent(simplex: &[(Vec<f64>, f64)]) -> (f64, f64) {
    let best = &simplex[0].0;
    let diameter = simplex[1..]
        .iter()
        .map(|(x, _)| x.iter().zip(best).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let last = simplex[simplex.len() - 1].1;
    let spread = if last.is_finite() { last - simplex[0].1 } else { f64::INFINITY };
    (diameter, spread)
}

fn record(iteration: usize, search: &Search, step: StepKind, simplex: &[(Vec<f64>, f64)], modes: usize) -> TraceRecord {
    let x = &simplex[0].0;
    let (simplex_diameter, value_spread) = extent(simplex);
    let mut b = vec![0.0];
    b.extend_from_slice(&x[modes + 1..]);
    TraceRecord {
        iteration,
        evaluations: search.evaluations,
        step,
        j: simplex[0].1,
        r0: x[0],
        a: x[1..=modes].to_vec(),
        b,
        simplex_diameter,
        value_spread,
    }
}

fn affine(c: &[f64], toward: &[f64], t: f64) -> Vec<f64> {
    c.iter().zip(toward).map(|(ci, wi)| ci + t * (wi - ci)).collect()
}

/// One Nelder–Mead iteration on a simplex sorted by value, with reflection 1,
/// expansion 2, contraction ½ and shrink ½. Returns `None` if the budget ran out.
fn nelder_mead_step(simplex: &mut [(Vec<f64>, f64)], search: &mut Search) -> Option<StepKind> {
    let n = simplex.len() - 1;
    let dim = simplex[0].0.len();
    let mut centroid = vec![0.0; dim];
    for (x, _) in &simplex[..n] {
        for (c, xi) in centroid.iter_mut().zip(x) {
            *c += xi / n as f64;
        }
    }
    let (f_best, f_second, f_worst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);
    let worst = simplex[n].0.clone();

    let xr = affine(&centroid, &worst, -1.0);
    let fr = search.eval(&xr)?;
    if fr < f_best {
        let xe = affine(&centroid, &worst, -2.0);
        let fe = search.eval(&xe)?;
        return Some(if fe < fr {
            simplex[n] = (xe, fe);
            StepKind::Expand
        } else {
            simplex[n] = (xr, fr);
            StepKind::Reflect
        });
    }
    if fr < f_second {
        simplex[n] = (xr, fr);
        return Some(StepKind::Reflect);
    }
    if fr < f_worst {
        let xc = affine(&centroid, &xr, 0.5);
        let fc = search.eval(&xc)?;
        if fc <= fr {
            simplex[n] = (xc, fc);
            return Some(StepKind::ContractOutside);
        }
    } else {
        let xc = affine(&centroid, &worst, 0.5);
        let fc = search.eval(&xc)?;
        if fc < f_worst {
            simplex[n] = (xc, fc);
            return Some(StepKind::ContractInside);
        }
    }
    let best = simplex[0].0.clone();
    for vertex in simplex[1..].iter_mut() {
        let x = affine(&best, &vertex.0, 0.5);
        let f = search.eval(&x)?;
        *vertex = (x, f);
    }
    Some(StepKind::Shrink)
}

/// One row of a sweep. Failed rows keep their parameter and carry the error.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub j: f64,
    pub c_mean: f64,
    pub c_std: f64,
    pub error: Option<Error>,
}

/// Evaluates `J` over a parametrized family, in the family's order. Rows run in parallel.
pub fn sweep(family: &[(f64, StarDomain)], profile: &WarpingProfile, ns: usize, ntheta: usize) -> Vec<SweepRow> {
    sweep_with(family, profile, ns, ntheta, SolverOptions::default())
}

pub fn sweep_with(
    family: &[(f64, StarDomain)],
    profile: &WarpingProfile,
    ns: usize,
    ntheta: usize,
    options: SolverOptions,
) -> Vec<SweepRow> {
    family
        .par_iter()
        .map(|(parameter, domain)| match neumann_deviation_with(domain, profile, ns, ntheta, options) {
            Ok(o) => SweepRow {
                parameter: *parameter,
                j: o.j,
                c_mean: o.c_mean,
                c_std: o.c_std,
                error: None,
            },
            Err(e) => SweepRow {
                parameter: *parameter,
                j: f64::NAN,
                c_mean: f64::NAN,
                c_std: f64::NAN,
                error: Some(e),
            },
        })
        .collect()
}

/// Disks of radius `radius` (measured in the `(r, θ)` chart) shifted by each offset.
pub fn offset_family(radius: f64, offsets: &[f64]) -> Result<Vec<(f64, StarDomain)>> {
    offsets
        .iter()
        .map(|&d| StarDomain::offset_disk(radius, d).map(|dom| (d, dom)))
        .collect()
}

/// Geodesic balls about the pole, parametrized by their radius.
pub fn radius_family(radii: &[f64]) -> Result<Vec<(f64, StarDomain)>> {
    radii.iter().map(|&r| StarDomain::disk(r).map(|dom| (r, dom))).collect()
}
