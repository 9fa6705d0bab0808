use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use finadapt::corpus::{get_instance, NAMES};
use finadapt::covers::CoverEnumeration;
use finadapt::io::{self, SolutionFile, SolveStatus};
use finadapt::model::Method;
use finadapt::solvers::{self, Outcome, SolveOptions, SolveReport};
use finadapt::verify::{self, Verdict, VerifyOptions};
use finadapt::{FormatError, Instance, ModelError, RenderError, SolveError, Tolerances, VerifyError};

const EXIT_OK: u8 = 0;
const EXIT_OTHER: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNBOUNDED: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

#[derive(Parser)]
#[command(name = "finadapt", version, about = "Finite adaptability for two-stage robust linear programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write a solution file.
    Solve(SolveArgs),
    /// Check that a solution file covers the uncertainty set.
    Verify(VerifyArgs),
    /// Scenario-based lower bound on the k-adaptable value.
    Lowerbound(LowerboundArgs),
    /// Draw the recovered cover of a two-dimensional instance as SVG.
    Render(RenderArgs),
    /// Write a built-in instance in the instance file format.
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Enum,
    Milp,
    #[value(name = "1d")]
    OneD,
    Comp,
}

/// A file path, or `corpus:NAME` for a built-in instance.
#[derive(Args)]
struct InstanceArg {
    #[arg(long, value_name = "PATH|corpus:NAME")]
    instance: String,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    k: u8,
    #[arg(long, value_enum, default_value = "enum")]
    method: MethodArg,
    #[command(flatten)]
    instance: InstanceArg,
    #[arg(long)]
    out: PathBuf,
    /// Enumerate every vertex assignment instead of one per relabelling class.
    #[arg(long)]
    no_symmetry_pruning: bool,
    /// Restrict k = 3 enumeration to covers where each vertex lies in one piece.
    #[arg(long)]
    single_membership: bool,
    #[arg(long)]
    big_m: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct LowerboundArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..))]
    k: u8,
    /// Points per edge of Ω, added to its vertices.
    #[arg(long, conflicts_with = "scenarios", required_unless_present = "scenarios")]
    grid: Option<usize>,
    /// JSON array of scenarios (numbers for one-dimensional Ω).
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long)]
    big_m: Option<f64>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    name: String,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Mismatch(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Mismatch(_) => EXIT_MISMATCH,
            Failure::Other(_) => EXIT_OTHER,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Mismatch(m) | Failure::Other(m) => m,
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let msg = e.to_string();
        match e {
            SolveError::RequiresDeterministicAB | SolveError::NotOneDimensional(_) | SolveError::UnsupportedK(_) => {
                Failure::Mismatch(msg)
            }
            SolveError::ScenarioOutsideOmega { .. } | SolveError::Model(ModelError::DimensionMismatch(_)) => {
                Failure::Input(msg)
            }
            _ => Failure::Other(msg),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::BadTolerance(_) | VerifyError::Model(_) => Failure::Input(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<RenderError> for Failure {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::NotTwoDimensional { .. } => Failure::Mismatch(e.to_string()),
            RenderError::Model(_) => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    let result = Tolerances::from_env()
        .map_err(|e| Failure::Input(format!("{}: {e}", finadapt::tolerances::TOLERANCE_ENV)))
        .and_then(|tol| match cli.command {
            Command::Solve(a) => cmd_solve(a, tol),
            Command::Verify(a) => cmd_verify(a, tol),
            Command::Lowerbound(a) => cmd_lowerbound(a, tol),
            Command::Render(a) => cmd_render(a),
            Command::Export(a) => cmd_export(a),
        });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn load_instance(arg: &InstanceArg) -> Result<Instance, Failure> {
    if let Some(name) = arg.instance.strip_prefix("corpus:") {
        return corpus_instance(name);
    }
    let path = Path::new(&arg.instance);
    io::parse_instance(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn corpus_instance(name: &str) -> Result<Instance, Failure> {
    get_instance(name)
        .map(|e| e.instance)
        .map_err(|_| Failure::Input(format!("unknown corpus instance `{name}` (known: {})", NAMES.join(", "))))
}

fn check_big_m(big_m: Option<f64>) -> Result<(), Failure> {
    match big_m {
        Some(m) if !(m.is_finite() && m > 0.0) => Err(Failure::Input(format!("--big-m must be positive, got {m}"))),
        _ => Ok(()),
    }
}

fn cmd_solve(a: SolveArgs, tol: Tolerances) -> Result<u8, Failure> {
    let k = a.k as usize;
    if a.method == MethodArg::Milp && k != 2 {
        return Err(Failure::Input(format!("--method milp needs --k 2, got {k}")));
    }
    check_big_m(a.big_m)?;
    let inst = load_instance(&a.instance)?;
    let opts = SolveOptions {
        tolerances: tol,
        threads: a.threads.map(usize::from),
        enumeration: CoverEnumeration { symmetry_pruning: !a.no_symmetry_pruning, single_membership: a.single_membership },
        big_m: a.big_m,
        certify: true,
    };
    let (report, method) = match (a.method, k) {
        (MethodArg::Enum, 1) => (solvers::solve_adapt1_with(&inst, &opts)?, Method::Adapt1),
        (MethodArg::Enum, 2) => (solvers::solve_adapt2_enum_with(&inst, &opts)?, Method::Enumeration),
        (MethodArg::Enum, _) => (solvers::solve_adapt3_enum_with(&inst, &opts)?, Method::Enumeration),
        (MethodArg::Milp, _) => (solvers::solve_adapt2_milp_with(&inst, &opts)?, Method::Milp),
        (MethodArg::OneD, _) => (solvers::solve_adapt_1d_with(&inst, k, &opts)?, Method::OneDimensional),
        (MethodArg::Comp, _) => (solvers::solve_comp_adapt_with(&inst, &opts)?, Method::CompAdapt),
    };
    let file = solution_file(&report, method, k);
    write(&a.out, &io::solution_to_json(&file))?;
    Ok(match &report.outcome {
        Outcome::Optimal(sol) => {
            println!("optimal {}", sol.objective);
            if let Some(c) = report.certificate.as_ref().filter(|c| !c.is_covered()) {
                eprintln!("warning: solution does not cover the uncertainty set (slack {})", c.max_uncovered_slack);
            }
            EXIT_OK
        }
        Outcome::Infeasible => {
            println!("INFEASIBLE");
            EXIT_INFEASIBLE
        }
        Outcome::Unbounded => {
            println!("UNBOUNDED");
            EXIT_UNBOUNDED
        }
    })
}

fn solution_file(report: &SolveReport, method: Method, k: usize) -> SolutionFile {
    match &report.outcome {
        Outcome::Optimal(sol) => {
            let mut f = SolutionFile::from_solution(sol, report.certificate.as_ref());
            f.breakpoints = report.breakpoints.clone();
            f
        }
        Outcome::Infeasible => SolutionFile::status_only(SolveStatus::Infeasible, method, k),
        Outcome::Unbounded => SolutionFile::status_only(SolveStatus::Unbounded, method, k),
    }
}

fn cmd_verify(a: VerifyArgs, tol: Tolerances) -> Result<u8, Failure> {
    let eps = a.tol.unwrap_or(tol.verify);
    let inst = load_instance(&a.instance)?;
    let file = io::parse_solution(&read(&a.solution)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.solution.display())))?;
    let sol = file.to_solution(&inst)?;
    let cert = verify::verify_cover_with(&inst, &sol, eps, &VerifyOptions { tolerances: tol, ..VerifyOptions::default() })?;
    if cert.verdict == Verdict::NotCovered {
        println!("NOT COVERED");
        if let Some(w) = &cert.witness {
            println!("witness: {}", serde_json::to_string(w).expect("witness serializes"));
        }
        println!("max uncovered slack: {}", cert.max_uncovered_slack);
        return Ok(EXIT_INFEASIBLE);
    }
    let value = inst.objective_value(&sol).map_err(|e| Failure::Input(e.to_string()))?;
    if (value - sol.objective).abs() > eps {
        println!("MISMATCH: recorded objective {} but the solution evaluates to {value}", sol.objective);
        return Ok(EXIT_INFEASIBLE);
    }
    if !verify::integrality_respected(&inst, &sol, tol.integrality) {
        println!("MISMATCH: integrality requirements violated");
        return Ok(EXIT_INFEASIBLE);
    }
    println!("COVERED objective {value}");
    Ok(EXIT_OK)
}

/// Vertices of Ω plus `n` equally spaced interior points on every edge.
fn edge_grid(inst: &Instance, n: usize) -> Vec<Vec<f64>> {
    let p = &inst.omega;
    let mut pts: Vec<Vec<f64>> = p.vertices().to_vec();
    for e in p.edges() {
        let (t, h) = (p.vertex(e.tail_index), p.vertex(e.head_index));
        for j in 1..=n {
            let s = j as f64 / (n + 1) as f64;
            pts.push(t.iter().zip(h).map(|(a, b)| a + s * (b - a)).collect());
        }
    }
    pts
}

fn cmd_lowerbound(a: LowerboundArgs, tol: Tolerances) -> Result<u8, Failure> {
    check_big_m(a.big_m)?;
    let inst = load_instance(&a.instance)?;
    let scenarios = match (&a.scenarios, a.grid) {
        (Some(path), _) => {
            io::parse_scenarios(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(n)) if n >= 2 => edge_grid(&inst, n),
        (None, Some(n)) => return Err(Failure::Input(format!("--grid needs at least 2 points per edge, got {n}"))),
        (None, None) => return Err(Failure::Input("either --grid or --scenarios is required".into())),
    };
    if scenarios.is_empty() {
        return Err(Failure::Input("no scenarios given".into()));
    }
    let opts = SolveOptions { tolerances: tol, big_m: a.big_m, ..SolveOptions::default() };
    let report = solvers::solve_scenario_lb_with(&inst, &scenarios, a.k as usize, &opts)?;
    Ok(match report.outcome {
        Outcome::Optimal(sol) => {
            println!("{}", sol.objective);
            EXIT_OK
        }
        Outcome::Infeasible => {
            println!("INFEASIBLE");
            EXIT_INFEASIBLE
        }
        Outcome::Unbounded => {
            println!("UNBOUNDED");
            EXIT_UNBOUNDED
        }
    })
}

fn cmd_render(a: RenderArgs) -> Result<u8, Failure> {
    let inst = load_instance(&a.instance)?;
    let file = io::parse_solution(&read(&a.solution)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.solution.display())))?;
    let sol = file.to_solution(&inst)?;
    let svg = finadapt::render::render_svg(&inst, &sol)?;
    write(&a.out, &svg)?;
    Ok(EXIT_OK)
}

fn cmd_export(a: ExportArgs) -> Result<u8, Failure> {
    let inst = corpus_instance(&a.name)?;
    let text = io::instance_to_json(&inst);
    match &a.out {
        Some(path) => write(path, &text)?,
        None => {
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    Ok(EXIT_OK)
}
