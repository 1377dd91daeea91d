//! Command-line front end: `key=value` run configurations, the five experiment
//! commands, and CSV/JSON tables.
//!
//! A configuration is a list of `key=value` lines (blank lines and `#` comments are
//! skipped). Every key can also be given as a flag, `--key value` or `--key=value`,
//! and flags override the file. Exit codes: 0 success, 1 a checked verdict failed,
//! 2 invalid configuration or unwritable output, 3 a solver did not converge.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closed_form::{
    bochner_residual, newton_equality_check, pohozaev_pointwise_residual, radial_torsion_solution,
};
use crate::discretization::{neumann_trace, solve_torsion, SolverOptions, StarDomain};
use crate::error::Error;
use crate::functionals::{compute_catalog, identity_report, FunctionalCatalog, Verdict};
use crate::geometry::{make_profile, ProfileKind, WarpingProfile};
use crate::rigidity::{
    offset_family, optimize_shape_with, radius_family, sweep_with, OptimizeOptions, MAX_MODES, MIN_BUDGET,
};

/// Largest pointwise residual the `radial` command accepts.
pub const POINTWISE_TOL: f64 = 1e-10;

/// Default cap of the radial coordinate for the euclidean and hyperbolic profiles.
pub const DEFAULT_R_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Radial,
    Solve,
    Verify,
    Rigidity,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Fourier,
    Offset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Offset,
    Radius,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: ProfileKind,
    pub r_max: f64,
    pub n: usize,
    pub r0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub shape: ShapeKind,
    pub offset: f64,
    pub ns: usize,
    pub ntheta: usize,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub report_tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub modes: usize,
    pub budget: usize,
    pub family: Family,
    pub values: Vec<f64>,
    pub samples: usize,
}

impl RunConfig {
    pub fn profile(&self) -> WarpingProfile {
        make_profile(self.geometry, self.r_max).expect("validated at parse time")
    }

    pub fn domain(&self) -> crate::error::Result<StarDomain> {
        match self.shape {
            ShapeKind::Fourier => StarDomain::fourier(self.r0, self.a.clone(), self.b.clone()),
            ShapeKind::Offset => StarDomain::offset_disk(self.r0, self.offset),
        }
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    fn family(&self) -> crate::error::Result<Vec<(f64, StarDomain)>> {
        match self.family {
            Family::Offset => offset_family(self.r0, &self.values),
            Family::Radius => radius_family(&self.values),
        }
    }
}

/// Where a key came from, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(usize),
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(l) => write!(f, "line {l}"),
            Origin::Flag(k) => write!(f, "argument {k}"),
            Origin::Default => f.write_str("default"),
        }
    }
}

/// Invalid configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: Origin,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: `{}`: {}", self.origin, self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

const KEYS: &[&str] = &[
    "command", "geometry", "r_max", "n", "R0", "a", "b", "shape", "d", "Ns", "Ntheta", "tol", "max_iter",
    "report_tol", "out", "format", "seed", "K", "budget", "family", "values", "samples",
];

struct Raw {
    entries: BTreeMap<&'static str, (String, Origin)>,
}

impl Raw {
    fn insert(&mut self, key: &str, value: &str, origin: Origin, allow_override: bool) -> Result<(), ConfigError> {
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError {
                origin,
                key: key.to_string(),
                message: format!("unknown key; expected one of {}", KEYS.join(", ")),
            });
        };
        if !allow_override {
            if let Some((_, first)) = self.entries.get(known) {
                return Err(ConfigError {
                    origin,
                    key: key.to_string(),
                    message: format!("already set at {first}"),
                });
            }
        }
        self.entries.insert(known, (value.trim().to_string(), origin));
        Ok(())
    }

    fn origin(&self, key: &'static str) -> Origin {
        self.entries.get(key).map(|e| e.1).unwrap_or(Origin::Default)
    }

    fn fail(&self, key: &'static str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            origin: self.origin(key),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn get<T: FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((v, _)) => v
                .parse()
                .map_err(|_| self.fail(key, format!("cannot parse `{v}` as {}", std::any::type_name::<T>()))),
        }
    }

    fn get_list(&self, key: &'static str) -> Result<Vec<f64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(Vec::new()),
            Some((v, _)) if v.is_empty() => Ok(Vec::new()),
            Some((v, _)) => v
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| self.fail(key, format!("cannot parse `{x}` as a number"))))
                .collect(),
        }
    }

    fn get_choice<T: Copy>(&self, key: &'static str, choices: &[(&str, T)], default: Option<T>) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((v, _)) => choices.iter().find(|c| c.0 == v).map(|c| Some(c.1)).ok_or_else(|| {
                let names: Vec<&str> = choices.iter().map(|c| c.0).collect();
                self.fail(key, format!("`{v}` is not one of {}", names.join(", ")))
            }),
        }
    }
}

/// Parses `key=value` text and `--key value` flags into a validated configuration.
///
/// Unknown and repeated keys are errors; flags override the text. Module
/// preconditions (grid sizes, radius bounds, mode counts) are checked here so that
/// a bad run fails before any solve.
pub fn parse_config(text: &str, flags: &[String]) -> Result<RunConfig, ConfigError> {
    let mut raw = Raw {
        entries: BTreeMap::new(),
    };
    for (idx, line) in text.lines().enumerate() {
        let origin = Origin::Line(idx + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                origin,
                key: line.to_string(),
                message: "expected `key=value`".into(),
            });
        };
        raw.insert(key.trim(), value, origin, false)?;
    }
    let mut k = 0;
    while k < flags.len() {
        let origin = Origin::Flag(k + 1);
        let Some(flag) = flags[k].strip_prefix("--") else {
            return Err(ConfigError {
                origin,
                key: flags[k].clone(),
                message: "expected a `--key` flag".into(),
            });
        };
        if let Some((key, value)) = flag.split_once('=') {
            raw.insert(key, value, origin, true)?;
            k += 1;
        } else {
            let value = flags.get(k + 1).ok_or_else(|| ConfigError {
                origin,
                key: flag.to_string(),
                message: "flag needs a value".into(),
            })?;
            raw.insert(flag, value, origin, true)?;
            k += 2;
        }
    }
    validate(&raw)
}

fn validate(raw: &Raw) -> Result<RunConfig, ConfigError> {
    let geometry = raw
        .get_choice(
            "geometry",
            &[
                ("euclidean", ProfileKind::Euclidean),
                ("spherical", ProfileKind::Spherical),
                ("hyperbolic", ProfileKind::Hyperbolic),
            ],
            Some(ProfileKind::Spherical),
        )?
        .expect("has default");
    let r_max = match (geometry, raw.entries.contains_key("r_max")) {
        (ProfileKind::Spherical, true) => {
            return Err(raw.fail("r_max", "the hemisphere bound is fixed at π/2"));
        }
        (ProfileKind::Spherical, false) => FRAC_PI_2,
        _ => raw.get("r_max", DEFAULT_R_MAX)?,
    };
    make_profile(geometry, r_max).map_err(|e| raw.fail("r_max", e.to_string()))?;

    let n: usize = raw.get("n", 2)?;
    if n < 2 {
        return Err(raw.fail("n", format!("dimension must be at least 2, got {n}")));
    }
    let r0: f64 = raw.get("R0", FRAC_PI_4)?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(raw.fail("R0", format!("must be positive, got {r0}")));
    }
    if r0 >= r_max {
        let bound = if geometry == ProfileKind::Spherical { "hemisphere bound π/2" } else { "r_max" };
        return Err(raw.fail("R0", format!("{r0} exceeds the {bound} = {r_max}")));
    }
    let a = raw.get_list("a")?;
    let b = raw.get_list("b")?;
    let shape = raw
        .get_choice("shape", &[("fourier", ShapeKind::Fourier), ("offset", ShapeKind::Offset)], Some(ShapeKind::Fourier))?
        .expect("has default");
    let offset: f64 = raw.get("d", 0.0)?;

    let ns: usize = raw.get("Ns", 64)?;
    if ns < 8 {
        return Err(raw.fail("Ns", format!("need at least 8 radial cells, got {ns}")));
    }
    let ntheta: usize = raw.get("Ntheta", 128)?;
    if !ntheta.is_multiple_of(2) {
        return Err(raw.fail("Ntheta", format!("Nθ must be even for the pole stencil, got {ntheta}")));
    }
    if ntheta < 16 {
        return Err(raw.fail("Ntheta", format!("need at least 16 angular cells, got {ntheta}")));
    }
    let tol: f64 = raw.get("tol", SolverOptions::default().tol)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(raw.fail("tol", format!("solver tolerance must lie in (0, 1), got {tol}")));
    }
    let max_iter = match raw.entries.get("max_iter") {
        None => None,
        Some(_) => Some(raw.get::<usize>("max_iter", 0)?),
    };
    if max_iter == Some(0) {
        return Err(raw.fail("max_iter", "must be positive"));
    }
    let report_tol: f64 = raw.get("report_tol", 1e-2)?;
    if !(report_tol > 0.0) {
        return Err(raw.fail("report_tol", format!("must be positive, got {report_tol}")));
    }
    let out = raw.entries.get("out").map(|(v, _)| PathBuf::from(v));
    let format = raw
        .get_choice("format", &[("csv", Format::Csv), ("json", Format::Json)], Some(Format::Csv))?
        .expect("has default");
    let seed: u64 = raw.get("seed", 0)?;
    let modes: usize = raw.get("K", 2)?;
    if modes == 0 || modes > MAX_MODES {
        return Err(raw.fail("K", format!("need 1 ≤ K ≤ {MAX_MODES}, got {modes}")));
    }
    let budget: usize = raw.get("budget", 400)?;
    if budget < MIN_BUDGET {
        return Err(raw.fail("budget", format!("need at least {MIN_BUDGET} evaluations, got {budget}")));
    }
    let family = raw
        .get_choice("family", &[("offset", Family::Offset), ("radius", Family::Radius)], Some(Family::Offset))?
        .expect("has default");
    let values = raw.get_list("values")?;
    let samples: usize = raw.get("samples", 101)?;
    if samples < 2 {
        return Err(raw.fail("samples", format!("need at least 2 samples, got {samples}")));
    }

    let command = raw.get_choice(
        "command",
        &[
            ("radial", Command::Radial),
            ("solve", Command::Solve),
            ("verify", Command::Verify),
            ("rigidity", Command::Rigidity),
            ("sweep", Command::Sweep),
        ],
        None,
    )?;

    let config = RunConfig {
        command: command.unwrap_or(Command::Radial),
        geometry,
        r_max,
        n,
        r0,
        a,
        b,
        shape,
        offset,
        ns,
        ntheta,
        tol,
        max_iter,
        report_tol,
        out,
        format,
        seed,
        modes,
        budget,
        family,
        values,
        samples,
    };

    // Shape checks apply to every command that builds a domain.
    let uses_domain = !matches!(command, Some(Command::Radial) | Some(Command::Sweep));
    if uses_domain {
        let fallback = if shape == ShapeKind::Offset { "d" } else { "a" };
        let domain = config.domain().map_err(|e| raw.fail(key_of(&e, fallback), e.to_string()))?;
        domain.validate(r_max).map_err(|e| raw.fail("R0", e.to_string()))?;
    }
    let Some(command) = command else {
        return Err(raw.fail("command", "missing; expected one of radial, solve, verify, rigidity, sweep"));
    };
    match command {
        Command::Radial => {
            if shape != ShapeKind::Fourier || !config.a.is_empty() || !config.b.is_empty() {
                return Err(raw.fail("shape", "the radial command works on geodesic balls; drop a, b and shape"));
            }
        }
        Command::Solve | Command::Rigidity if n != 2 => {
            return Err(raw.fail("n", "the finite-difference solver is two-dimensional"));
        }
        Command::Verify if n != 2 && !config.domain().map(|d| d.is_geodesic_ball()).unwrap_or(false) => {
            return Err(raw.fail("n", "verify with n > 2 needs a geodesic ball (closed-form catalog)"));
        }
        Command::Rigidity if shape != ShapeKind::Fourier => {
            return Err(raw.fail("shape", "the optimizer starts from a Fourier boundary"));
        }
        Command::Sweep => {
            if n != 2 {
                return Err(raw.fail("n", "the finite-difference solver is two-dimensional"));
            }
            if config.values.is_empty() {
                return Err(raw.fail("values", "sweep needs a non-empty list of family parameters"));
            }
            let family = config.family().map_err(|e| raw.fail("values", e.to_string()))?;
            for (p, d) in &family {
                d.validate(r_max)
                    .map_err(|e| raw.fail("values", format!("member {p}: {e}")))?;
            }
        }
        _ => {}
    }
    Ok(RunConfig { command, ..config })
}

/// The configuration key a library error refers to, if it names one.
fn key_of(e: &Error, fallback: &'static str) -> &'static str {
    match e {
        Error::InvalidParameter { name, .. } => KEYS.iter().copied().find(|k| k == name).unwrap_or(fallback),
        _ => fallback,
    }
}

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    VerdictFailure = 1,
    ConfigError = 2,
    NotConverged = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Exit status for a library error.
    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::NotConverged { .. } | Error::Quadrature { .. } => ExitStatus::NotConverged,
            _ => ExitStatus::ConfigError,
        }
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) if v.is_finite() => serde_json::Value::Number(
                serde_json::Number::from_str(&format_number(*v)).expect("scientific notation is valid JSON"),
            ),
            Cell::Num(_) => serde_json::Value::Null,
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// A named-column table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV has a header row; JSON is an array with one object per row. Non-finite
    /// numbers are `NaN`/`inf` in CSV and `null` in JSON.
    pub fn write(&self, format: Format, mut w: impl Write) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let mut writer = csv::Writer::from_writer(w);
                writer.write_record(&self.columns)?;
                for row in &self.rows {
                    writer.write_record(row.iter().map(Cell::csv))?;
                }
                writer.flush()
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut w, &rows)?;
                writeln!(w)
            }
        }
    }
}

/// Tables and status produced by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub main: Table,
    /// Suffix and content of the companion table, written next to the main output as
    /// `<stem>.<suffix>.<ext>`.
    pub secondary: Option<(&'static str, Table)>,
}

/// Runs one command. Numerical failures come back as `Err`; verdict failures as an
/// `Outcome` with [`ExitStatus::VerdictFailure`].
pub fn run(config: &RunConfig) -> crate::error::Result<Outcome> {
    match config.command {
        Command::Radial => run_radial(config),
        Command::Solve => run_solve(config),
        Command::Verify => run_verify(config),
        Command::Rigidity => run_rigidity(config),
        Command::Sweep => run_sweep(config),
    }
}

fn catalog_table(catalog: &FunctionalCatalog, extra: &[(&'static str, f64)]) -> Table {
    let mut t = Table::new(&["name", "value"]);
    for (name, value) in catalog.entries().into_iter().chain(extra.iter().copied()) {
        t.push(vec![Cell::Text(name.into()), Cell::Num(value)]);
    }
    t
}

/// Closed-form samples on a uniform radial grid, the radial catalog, and pointwise
/// identity residuals at `samples` radii drawn from `seed`.
fn run_radial(config: &RunConfig) -> crate::error::Result<Outcome> {
    let sol = radial_torsion_solution(&config.profile(), config.n, config.r0)?;
    let mut main = Table::new(&[
        "r", "u", "u_r", "hess_radial", "hess_tangential", "laplacian", "bochner_residual", "pohozaev_residual", "newton_gap",
    ]);
    for k in 0..config.samples {
        let r = config.r0 * (k as f64 + 0.5) / config.samples as f64;
        let (radial, tangential) = sol.hessian_eigenvalues(r)?;
        main.push(vec![
            Cell::Num(r),
            Cell::Num(sol.u(r)),
            Cell::Num(sol.u_r(r)),
            Cell::Num(radial),
            Cell::Num(tangential),
            Cell::Num(sol.laplacian(r)?),
            Cell::Num(bochner_residual(&sol, r)?),
            Cell::Num(pohozaev_pointwise_residual(&sol, r)?),
            Cell::Num(newton_equality_check(&sol, r)?),
        ]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut bochner, mut pohozaev, mut newton) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..config.samples {
        let r = config.r0 * rng.gen_range(f64::EPSILON..1.0);
        bochner = bochner.max(bochner_residual(&sol, r)?.abs());
        pohozaev = pohozaev.max(pohozaev_pointwise_residual(&sol, r)?.abs());
        newton = newton.max(newton_equality_check(&sol, r)?.abs());
    }
    let catalog = compute_catalog(&sol)?;
    let report = identity_report(&catalog, config.report_tol);
    let pointwise_ok = bochner < POINTWISE_TOL && pohozaev < POINTWISE_TOL && newton < POINTWISE_TOL;
    let status = if pointwise_ok && report.all_pass() {
        ExitStatus::Success
    } else {
        ExitStatus::VerdictFailure
    };
    let extra = [
        ("random_max_bochner_residual", bochner),
        ("random_max_pohozaev_residual", pohozaev),
        ("random_max_newton_gap", newton),
    ];
    Ok(Outcome {
        status,
        main,
        secondary: Some(("catalog", catalog_table(&catalog, &extra))),
    })
}

fn run_solve(config: &RunConfig) -> crate::error::Result<Outcome> {
    let u = solve_torsion(&config.profile(), &config.domain()?, config.ns, config.ntheta, config.solver())?;
    let grid = u.grid();
    let mut main = Table::new(&["j", "i", "s", "theta", "r", "u"]);
    for j in 0..grid.ns() {
        for i in 0..grid.ntheta() {
            main.push(vec![
                Cell::Int(j as i64),
                Cell::Int(i as i64),
                Cell::Num(grid.s(j)),
                Cell::Num(grid.theta(i)),
                Cell::Num(grid.radius(j, i)),
                Cell::Num(u.value(j, i)),
            ]);
        }
    }
    let trace = neumann_trace(&u);
    let mut t = Table::new(&["theta", "neumann", "weight"]);
    for ((theta, value), weight) in trace.theta.iter().zip(&trace.values).zip(&trace.weights) {
        t.push(vec![Cell::Num(*theta), Cell::Num(*value), Cell::Num(*weight)]);
    }
    Ok(Outcome {
        status: ExitStatus::Success,
        main,
        secondary: Some(("neumann", t)),
    })
}

fn run_verify(config: &RunConfig) -> crate::error::Result<Outcome> {
    let catalog = if config.n == 2 {
        let u = solve_torsion(&config.profile(), &config.domain()?, config.ns, config.ntheta, config.solver())?;
        compute_catalog(&u)?
    } else {
        compute_catalog(&radial_torsion_solution(&config.profile(), config.n, config.r0)?)?
    };
    let report = identity_report(&catalog, config.report_tol);
    let mut main = Table::new(&["label", "hypothesis_class", "lhs", "rhs", "abs_residual", "rel_residual", "verdict"]);
    for r in &report.records {
        main.push(vec![
            Cell::Text(r.label.into()),
            Cell::Text(r.hypothesis_class.to_string()),
            Cell::Num(r.lhs),
            Cell::Num(r.rhs),
            Cell::Num(r.abs_residual),
            Cell::Num(r.rel_residual),
            Cell::Text(r.verdict.to_string()),
        ]);
    }
    let status = if report.records.iter().any(|r| r.verdict == Verdict::Fail) {
        ExitStatus::VerdictFailure
    } else {
        ExitStatus::Success
    };
    Ok(Outcome {
        status,
        main,
        secondary: Some(("catalog", catalog_table(&catalog, &[]))),
    })
}

fn run_rigidity(config: &RunConfig) -> crate::error::Result<Outcome> {
    let options = OptimizeOptions {
        solver: config.solver(),
        ..OptimizeOptions::default()
    };
    let trace = optimize_shape_with(
        &config.domain()?,
        config.modes,
        &config.profile(),
        config.budget,
        config.ns,
        config.ntheta,
        options,
    )?;
    let mut columns = vec!["iteration", "evaluations", "step", "J", "simplex_diameter", "value_spread", "R0"];
    columns.extend(COEFF_NAMES[..config.modes].iter().map(|(a, _)| *a));
    columns.extend(COEFF_NAMES[..config.modes].iter().map(|(_, b)| *b));
    let mut main = Table::new(&columns);
    for r in &trace.records {
        let mut row = vec![
            Cell::Int(r.iteration as i64),
            Cell::Int(r.evaluations as i64),
            Cell::Text(r.step.to_string()),
            Cell::Num(r.j),
            Cell::Num(r.simplex_diameter),
            Cell::Num(r.value_spread),
            Cell::Num(r.r0),
        ];
        row.extend(r.a.iter().chain(&r.b).map(|&v| Cell::Num(v)));
        main.push(row);
    }
    let mut summary = Table::new(&["name", "value"]);
    summary.push(vec![Cell::Text("termination".into()), Cell::Text(trace.termination.to_string())]);
    summary.push(vec![Cell::Text("evaluations".into()), Cell::Int(trace.evaluations as i64)]);
    summary.push(vec![Cell::Text("best_J".into()), Cell::Num(trace.best_j)]);
    summary.push(vec![Cell::Text("mean_radius".into()), Cell::Num(trace.best.mean_radius())]);
    Ok(Outcome {
        status: ExitStatus::Success,
        main,
        secondary: Some(("summary", summary)),
    })
}

const COEFF_NAMES: [(&str, &str); MAX_MODES] = [
    ("a1", "b1"),
    ("a2", "b2"),
    ("a3", "b3"),
    ("a4", "b4"),
    ("a5", "b5"),
    ("a6", "b6"),
    ("a7", "b7"),
    ("a8", "b8"),
];

fn run_sweep(config: &RunConfig) -> crate::error::Result<Outcome> {
    let family = config.family()?;
    let rows = sweep_with(&family, &config.profile(), config.ns, config.ntheta, config.solver());
    let mut main = Table::new(&["parameter", "J", "c_mean", "c_std", "error"]);
    let mut status = ExitStatus::Success;
    for r in &rows {
        if let Some(e) = &r.error {
            let row_status = match ExitStatus::for_error(e) {
                ExitStatus::NotConverged => ExitStatus::NotConverged,
                _ => ExitStatus::VerdictFailure,
            };
            status = status.max_by_code(row_status);
        }
        main.push(vec![
            Cell::Num(r.parameter),
            Cell::Num(r.j),
            Cell::Num(r.c_mean),
            Cell::Num(r.c_std),
            Cell::Text(r.error.as_ref().map(|e| e.to_string()).unwrap_or_default()),
        ]);
    }
    Ok(Outcome {
        status,
        main,
        secondary: None,
    })
}

impl ExitStatus {
    fn max_by_code(self, other: ExitStatus) -> ExitStatus {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

/// Path of a companion table: `out.csv` with suffix `catalog` becomes `out.catalog.csv`.
pub fn companion_path(out: &Path, suffix: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

/// Runs `config` and writes its tables: to `out` (plus the companion file) when set,
/// otherwise the main table to `stdout`. Returns the process exit status.
pub fn execute(config: &RunConfig, stdout: impl Write, stderr: &mut impl Write) -> ExitStatus {
    let outcome = match run(config) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return ExitStatus::for_error(&e);
        }
    };
    let written = match &config.out {
        None => outcome.main.write(config.format, stdout),
        Some(path) => write_file(path, &outcome.main, config.format).and_then(|_| match &outcome.secondary {
            Some((suffix, table)) => write_file(&companion_path(path, suffix, config.format), table, config.format),
            None => Ok(()),
        }),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return ExitStatus::ConfigError;
    }
    outcome.status
}

fn write_file(path: &Path, table: &Table, format: Format) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    table.write(format, &mut w)?;
    w.flush()
}

/// Splits command-line arguments into an optional positional config path and flags.
pub fn split_args(args: &[String]) -> Result<(Option<PathBuf>, Vec<String>), ConfigError> {
    let mut path = None;
    let mut flags = Vec::new();
    let mut k = 0;
    while k < args.len() {
        let arg = &args[k];
        if arg.starts_with("--") {
            flags.push(arg.clone());
            if !arg.contains('=') {
                if let Some(v) = args.get(k + 1) {
                    flags.push(v.clone());
                    k += 1;
                }
            }
        } else if path.is_none() {
            path = Some(PathBuf::from(arg));
        } else {
            return Err(ConfigError {
                origin: Origin::Flag(k + 1),
                key: arg.clone(),
                message: "only one configuration file may be given".into(),
            });
        }
        k += 1;
    }
    Ok((path, flags))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(text, &[])
    }

    #[test]
    fn parse_examples() {
        let c = parse("geometry=spherical\nn=2\nR0=0.7853981634\ncommand=verify").unwrap();
        assert_eq!(c.command, Command::Verify);
        assert_eq!(c.geometry, ProfileKind::Spherical);
        assert_eq!(c.r0, 0.785_398_163_4);

        let e = parse("geometry=spherical\nR0=2.0").unwrap_err();
        assert_eq!(e.key, "R0");
        assert_eq!(e.origin, Origin::Line(2));
        assert!(e.message.contains("hemisphere"), "{e}");

        let e = parse("Ntheta=15").unwrap_err();
        assert_eq!(e.key, "Ntheta");
        assert_eq!(e.origin, Origin::Line(1));
        assert!(e.message.contains("even"));
    }

    #[test]
    fn unknown_repeated_and_malformed_keys() {
        let e = parse("command=solve\nbogus=1").unwrap_err();
        assert_eq!((e.key.as_str(), e.origin), ("bogus", Origin::Line(2)));
        let e = parse("n=2\n\n# comment\nn=3").unwrap_err();
        assert_eq!(e.origin, Origin::Line(4));
        let e = parse("command solve").unwrap_err();
        assert_eq!(e.origin, Origin::Line(1));
        let e = parse("n=two\ncommand=radial").unwrap_err();
        assert_eq!(e.key, "n");
        let e = parse("geometry=flat").unwrap_err();
        assert_eq!(e.key, "geometry");
        assert_eq!(parse("n=2").unwrap_err().key, "command");
    }

    #[test]
    fn flags_override_file() {
        let flags: Vec<String> = ["--Ns", "32", "--format=json", "--command", "solve"].map(String::from).to_vec();
        let c = parse_config("command=verify\nNs=16", &flags).unwrap();
        assert_eq!(c.ns, 32);
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.command, Command::Solve);
        let e = parse_config("", &["--Ntheta".into()]).unwrap_err();
        assert_eq!(e.origin, Origin::Flag(1));
    }

    #[test]
    fn cross_key_preconditions() {
        assert_eq!(parse("command=solve\nn=3").unwrap_err().key, "n");
        assert_eq!(parse("command=verify\nn=3").unwrap().n, 3);
        assert_eq!(parse("command=verify\nn=3\na=0.1").unwrap_err().key, "n");
        assert_eq!(parse("command=rigidity\nK=9").unwrap_err().key, "K");
        assert_eq!(parse("command=rigidity\nbudget=10").unwrap_err().key, "budget");
        assert_eq!(parse("command=solve\nshape=offset\nd=0.9").unwrap_err().key, "d");
        assert_eq!(parse("command=solve\nR0=1.4\na=0.2").unwrap_err().key, "R0");
        assert_eq!(parse("command=sweep").unwrap_err().key, "values");
        assert_eq!(parse("command=sweep\nfamily=radius\nvalues=0.5,1.7").unwrap_err().key, "values");
        assert_eq!(parse("command=radial\ngeometry=spherical\nr_max=3").unwrap_err().key, "r_max");
        let c = parse("command=radial\ngeometry=hyperbolic\nr_max=3\nR0=2.5").unwrap();
        assert_eq!(c.r_max, 3.0);
    }

    #[test]
    fn verify_ball_reports_ten_passing_rows() {
        let c = parse("command=verify\nR0=0.7853981633974483\nNs=32\nNtheta=64").unwrap();
        let o = run(&c).unwrap();
        assert_eq!(o.status, ExitStatus::Success);
        assert_eq!(o.main.rows.len(), 10);
        assert_eq!(o.main.columns, ["label", "hypothesis_class", "lhs", "rhs", "abs_residual", "rel_residual", "verdict"]);
    }

    #[test]
    fn verify_generic_domain_marks_rows_not_applicable() {
        let c = parse("command=verify\nR0=0.8\na=0,0,0.15\nNs=32\nNtheta=64").unwrap();
        let o = run(&c).unwrap();
        assert_eq!(o.status, ExitStatus::Success);
        let na = o.main.rows.iter().filter(|r| r[6] == Cell::Text("not_applicable".into())).count();
        assert_eq!(na, 6);
    }

    #[test]
    fn sweep_euclidean_offsets() {
        let c = parse("command=sweep\ngeometry=euclidean\nR0=1\nfamily=offset\nvalues=0,0.05,0.1,0.2\nNs=16\nNtheta=32").unwrap();
        let o = run(&c).unwrap();
        assert_eq!(o.status, ExitStatus::Success);
        assert_eq!(o.main.rows.len(), 4);
    }

    #[test]
    fn non_convergence_maps_to_exit_three() {
        let c = parse("command=solve\nmax_iter=1\ntol=1e-14\nNs=16\nNtheta=32").unwrap();
        let mut err = Vec::new();
        assert_eq!(execute(&c, std::io::sink(), &mut err), ExitStatus::NotConverged);
        assert!(String::from_utf8(err).unwrap().contains("linear solver"));
    }

    #[test]
    fn numbers_round_trip_with_seventeen_digits() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 2.5e-300, -7.0] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn json_mirrors_csv_columns() {
        let mut t = Table::new(&["z", "a", "text"]);
        t.push(vec![Cell::Num(0.1), Cell::Int(3), Cell::Text("x,y".into())]);
        t.push(vec![Cell::Num(f64::NAN), Cell::Int(-1), Cell::Text(String::new())]);
        let mut csv_out = Vec::new();
        t.write(Format::Csv, &mut csv_out).unwrap();
        let csv_text = String::from_utf8(csv_out).unwrap();
        assert_eq!(csv_text.lines().next().unwrap(), "z,a,text");
        assert!(csv_text.contains("\"x,y\""));
        let mut json_out = Vec::new();
        t.write(Format::Json, &mut json_out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json_out).unwrap();
        let keys: Vec<&String> = v[0].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["z", "a", "text"]);
        assert_eq!(v[0]["z"].to_string(), "1.0000000000000001e-1");
        assert!(v[1]["z"].is_null());
    }

    #[test]
    fn companion_names() {
        assert_eq!(companion_path(Path::new("/tmp/run.csv"), "catalog", Format::Csv), PathBuf::from("/tmp/run.catalog.csv"));
        assert_eq!(companion_path(Path::new("out"), "neumann", Format::Json), PathBuf::from("out.neumann.json"));
    }

    #[test]
    fn split_positional_and_flags() {
        let args: Vec<String> = ["run.cfg", "--out", "x.csv", "--format=json"].map(String::from).to_vec();
        let (path, flags) = split_args(&args).unwrap();
        assert_eq!(path, Some(PathBuf::from("run.cfg")));
        assert_eq!(flags, ["--out", "x.csv", "--format=json"]);
        assert!(split_args(&["a".into(), "b".into()]).is_err());
    }
}
