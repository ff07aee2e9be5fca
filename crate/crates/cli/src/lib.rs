//! Command-line front end: problem ingestion, solve/evaluate/diagnose
//! subcommands and deterministic JSON/CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod schema;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use utm_core::corner_analysis::{classify, CornerCase};
use utm_core::evaluator::{evaluate_grid, interior_lattice};
use utm_core::geometry::{gauge_align, GaugeMode};
use utm_core::global_relation::{check_solution, collocation_set, normalized_residual, solve_dn_map_unchecked, CollocationConfig};
use utm_core::halfstrip::{field_grid, verify, HalfStripParams};

use schema::{DiagnosticsJson, OutputKind, ProblemFile, SolutionFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RANK_DEFICIENT: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] utm_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(utm_core::Error::RankDeficient { .. }) => EXIT_RANK_DEFICIENT,
            CliError::Core(utm_core::Error::NonConvergence { .. }) => EXIT_NON_CONVERGENCE,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "utm", version, about = "Unified transform solver for the modified Helmholtz equation in convex polygons")]
pub struct Cli {
    /// Requested accuracy; each subcommand has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Legendre modes per unknown side datum (overrides the problem file).
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Collocation points per ray (overrides the problem file).
    #[arg(long, global = true)]
    pub rays: Option<usize>,
    /// Output directory for `solve`, output file elsewhere (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    #[value(name = "NN", alias = "nn")]
    Nn,
    #[value(name = "DD", alias = "dd")]
    Dd,
    #[value(name = "DN", alias = "dn")]
    Dn,
    #[value(name = "DD-disc", alias = "dd-disc")]
    DdDisc,
}

impl From<CaseArg> for CornerCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Nn => CornerCase::NeumannNeumannContinuous,
            CaseArg::Dd => CornerCase::DirichletDirichletContinuous,
            CaseArg::Dn => CornerCase::DirichletNeumannVanishing,
            CaseArg::DdDisc => CornerCase::DirichletDirichletDiscontinuous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GaugeArg {
    /// Side `i` onto `(0, 1)`.
    Side,
    /// Vertex `i` onto `i`.
    Vertex,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover the unknown boundary values; writes solution.json and diagnostics.json.
    Solve { problem: PathBuf },
    /// Evaluate the interior field of a solution on a lattice (CSV x,y,re,im).
    EvalGrid {
        solution: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        nx: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        ny: u32,
        /// Minimum distance of grid points from the boundary.
        #[arg(long, default_value_t = 0.1)]
        margin: f64,
    },
    /// Global-relation residual of a solution on the rays of every side.
    ResidualScan {
        solution: PathBuf,
        /// Rays are sampled at radii beta e^s, |s| <= s_max.
        #[arg(long, default_value_t = 4.0)]
        s_max: f64,
    },
    /// Admissible corner exponents for an interior angle (radians).
    Corner {
        case: CaseArg,
        delta: f64,
        #[arg(long, default_value_t = 3)]
        m_max: u32,
    },
    /// Half-strip reference problem: verification report and optional field CSV.
    Halfstrip {
        beta: f64,
        ell: f64,
        /// Write q on a lattice of [x_min, x_max] x (0, ell) to this CSV.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        nx: usize,
        #[arg(long, default_value_t = 8)]
        ny: usize,
        #[arg(long, default_value_t = 0.05)]
        x_min: f64,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
    },
    /// Similarity transform placing a side or vertex in the reference position.
    Gauge {
        problem: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_enum, default_value_t = GaugeArg::Side)]
        mode: GaugeArg,
    },
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn sorted_json<S: Serialize>(v: &S) -> String {
    let value = serde_json::to_value(v).expect("serialisable");
    let mut s = serde_json::to_string_pretty(&value).expect("serialisable");
    s.push('\n');
    s
}

fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn check_tol(tol: f64) -> Result<f64, CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    Ok(tol)
}

fn cmd_solve(cli: &Cli, problem_path: &Path) -> Result<(), CliError> {
    let mut problem: ProblemFile = read_json(problem_path)?;
    if let Some(m) = cli.modes {
        problem.solver.modes = m;
    }
    if let Some(r) = cli.rays {
        problem.solver.points_per_ray = r;
    }
    if let Some(t) = cli.tol {
        problem.solver.validation_tol = check_tol(t)?;
    }
    let polygon = problem.polygon()?;
    let bc = problem.conditions()?;
    let config = problem.solver.config();
    let solved = solve_dn_map_unchecked(&polygon, problem.beta, &bc, &config)?;
    let check = check_solution(&solved, &config);
    let status = match &check {
        Ok(()) => "converged",
        Err(utm_core::Error::RankDeficient { .. }) => "rank_deficient",
        Err(_) => "non_convergence",
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    if problem.outputs.contains(&OutputKind::Diagnostics) {
        let diag = DiagnosticsJson::new(&solved.diagnostics, config.validation_tol, status);
        write_file(&dir.join("diagnostics.json"), &sorted_json(&diag))?;
    }
    check?;
    if problem.outputs.contains(&OutputKind::Solution) {
        let sol = SolutionFile::from_sides(&problem.vertices, problem.beta, &solved.sides);
        write_file(&dir.join("solution.json"), &sorted_json(&sol))?;
    }
    Ok(())
}

fn cmd_eval_grid(cli: &Cli, path: &Path, nx: u32, ny: u32, margin: f64) -> Result<(), CliError> {
    if !(margin > 0.0) {
        return Err(CliError::Usage(format!("--margin must be positive, got {margin}")));
    }
    let tol = check_tol(cli.tol.unwrap_or(1e-10))?;
    let sol: SolutionFile = read_json(path)?;
    let (polygon, data) = sol.load()?;
    let points = interior_lattice(&polygon, nx as usize, ny as usize, margin);
    let grid = evaluate_grid(&polygon, sol.beta, &data, &points, tol)?;
    emit(cli.out.as_deref(), &grid.to_csv())
}

fn cmd_residual_scan(cli: &Cli, path: &Path, s_max: f64) -> Result<(), CliError> {
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(CliError::Usage(format!("--s-max must be positive, got {s_max}")));
    }
    let tol = check_tol(cli.tol.unwrap_or(1e-9))?;
    let sol: SolutionFile = read_json(path)?;
    let (polygon, data) = sol.load()?;
    let config = CollocationConfig::<f64> { points_per_ray: cli.rays.unwrap_or(24), ray_halfwidth: s_max, ..CollocationConfig::default() };
    let mut points = Vec::new();
    let mut max = 0.0_f64;
    for p in collocation_set(&polygon, sol.beta, &config) {
        let r = normalized_residual(&polygon, sol.beta, &data, p.lambda)?;
        max = max.max(r);
        points.push(json!({"ray": p.ray, "s": p.s, "lambda": [p.lambda.re, p.lambda.im], "residual": r}));
    }
    let report = json!({
        "max_normalized_residual": max,
        "requested_tol": tol,
        "within_tol": max <= tol,
        "points": points,
    });
    emit(cli.out.as_deref(), &sorted_json(&report))
}

fn cmd_corner(cli: &Cli, case: CaseArg, delta: f64, m_max: u32) -> Result<(), CliError> {
    let report = classify(case.into(), delta, m_max)?;
    let mut value = serde_json::to_value(&report).expect("serialisable");
    if let (Value::Object(map), Some(t)) = (&mut value, cli.tol) {
        map.insert("requested_tol".into(), json!(check_tol(t)?));
    }
    emit(cli.out.as_deref(), &sorted_json(&value))
}

fn cmd_halfstrip(cli: &Cli, beta: f64, ell: f64, field: Option<&Path>, nx: usize, ny: usize, x_range: (f64, f64)) -> Result<(), CliError> {
    let tol = check_tol(cli.tol.unwrap_or(1e-11))?;
    let params = HalfStripParams::new(beta, ell)?;
    let report = verify(&params, tol)?;
    let mut value = serde_json::to_value(report).expect("serialisable");
    if let Value::Object(map) = &mut value {
        map.insert("requested_tol".into(), json!(tol));
    }
    if let Some(path) = field {
        if nx == 0 || ny == 0 || !(x_range.0 > 0.0 && x_range.1 > x_range.0) {
            return Err(CliError::Usage("field grid needs nx, ny >= 1 and 0 < x_min < x_max".into()));
        }
        let mut csv = String::from("x,y,q\n");
        for (x, y, q) in field_grid(&params, x_range, nx, ny, tol)? {
            let _ = writeln!(csv, "{x:.16e},{y:.16e},{q:.16e}");
        }
        write_file(path, &csv)?;
    }
    emit(cli.out.as_deref(), &sorted_json(&value))
}

fn cmd_gauge(cli: &Cli, path: &Path, index: usize, mode: GaugeArg) -> Result<(), CliError> {
    let problem: ProblemFile = read_json(path)?;
    let polygon = problem.polygon()?;
    if index >= polygon.len() {
        return Err(CliError::Usage(format!("index {index} out of range for {} vertices", polygon.len())));
    }
    let mode = match mode {
        GaugeArg::Side => GaugeMode::SideOnUnitInterval,
        GaugeArg::Vertex => GaugeMode::VertexAtI,
    };
    let (g, image, beta) = gauge_align(&polygon, index, mode, problem.beta)?;
    let vertices: Vec<[f64; 2]> = image.vertices().iter().map(|z: &Complex64| [z.re, z.im]).collect();
    let report = json!({
        "rotation": g.rotation,
        "translation": [g.translation.re, g.translation.im],
        "scale": g.scale,
        "beta": beta,
        "vertices": vertices,
    });
    emit(cli.out.as_deref(), &sorted_json(&report))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve { problem } => cmd_solve(cli, problem),
        Command::EvalGrid { solution, nx, ny, margin } => cmd_eval_grid(cli, solution, *nx, *ny, *margin),
        Command::ResidualScan { solution, s_max } => cmd_residual_scan(cli, solution, *s_max),
        Command::Corner { case, delta, m_max } => cmd_corner(cli, *case, *delta, *m_max),
        Command::Halfstrip { beta, ell, field, nx, ny, x_min, x_max } => {
            cmd_halfstrip(cli, *beta, *ell, field.as_deref(), *nx, *ny, (*x_min, *x_max))
        }
        Command::Gauge { problem, index, mode } => cmd_gauge(cli, problem, *index, *mode),
    }
}

/// Parse, run and map the outcome to an exit code.
pub fn main_with<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let rd = CliError::Core(utm_core::Error::RankDeficient { rank: 1, cols: 2, condition: 1e20 });
        let nc = CliError::Core(utm_core::Error::NonConvergence { residual: 1.0, threshold: 1e-6 });
        assert_eq!(rd.exit_code(), EXIT_RANK_DEFICIENT);
        assert_eq!(nc.exit_code(), EXIT_NON_CONVERGENCE);
        assert_eq!(CliError::Schema("x".into()).exit_code(), EXIT_USAGE);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with(["utm", "eval-grid", "s.json", "--nx", "0", "--ny", "3"]), EXIT_USAGE);
        assert_eq!(main_with(["utm", "corner", "XY", "1.0"]), EXIT_USAGE);
        assert_eq!(main_with(["utm"]), EXIT_USAGE);
        assert_eq!(main_with(["utm", "--help"]), EXIT_OK);
    }

    #[test]
    fn sorted_keys() {
        let s = sorted_json(&json!({"b": 1, "a": {"d": 2, "c": 3}}));
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
    }
}
