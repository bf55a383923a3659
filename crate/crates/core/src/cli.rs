//! `ptr` command-line front end.
//!
//! Exit codes: 0 ok, 1 input error, 2 broken spectrum, 3 exceptional point,
//! 4 no metric, 5 overflow.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::error::Error;
use crate::evolution::evolve_with;
use crate::grid::linspace;
use crate::linalg::{eig, solve_intertwiner, ComplexMatrix, C64, DEFAULT_NULL_TOL};
use crate::metric::{build_metric, MetricPolicy};
use crate::odes::{canonical_initial, integrate, wave_equation, EquationKind, SecondOrderIvp};
use crate::response::{build_model, response_curve, time_response, time_response_csv, PropagatorKind, ResonanceParams};
use crate::symmetry::{check_pt, classify_eigensystem, AntilinearSymmetry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BROKEN: i32 = 2;
pub const EXIT_EXCEPTIONAL: i32 = 3;
pub const EXIT_NO_METRIC: i32 = 4;
pub const EXIT_OVERFLOW: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "ptr", version, about = "Non-Hermitian spectra, metric operators and resonance propagators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a spectrum into real values, conjugate pairs and unmatched values.
    Classify(ClassifyArgs),
    /// Construct a metric operator V with V H = H^dagger V.
    Metric(MetricArgs),
    /// Evolve a state and report Dirac and V norms.
    Evolve(EvolveArgs),
    /// Energy-domain response curves and time-domain propagator.
    Response(ResponseArgs),
    /// Integrate a second-order wave equation.
    Ode(OdeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// diag(E0 + i gamma, E0 - i gamma).
    TwoLevel,
    /// [[E0, gamma], [gamma, E0]].
    Hermitian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    BreitWigner,
    PtPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EquationArg {
    Pt,
    Damped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    HermitianRepresentative,
    PaperGauge,
    FirstBasis,
}

/// Where the Hamiltonian comes from: a matrix file, `M(s)`, or the
/// conjugate pair `diag(E0 + i gamma, E0 - i gamma)`.
#[derive(Debug, Args)]
pub struct MatrixSource {
    /// Matrix JSON file.
    #[arg(long, conflicts_with_all = ["s", "e0"])]
    pub input: Option<PathBuf>,
    /// Build [[1+i, s], [s, 1-i]].
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// With --gamma: build diag(E0 + i gamma, E0 - i gamma).
    #[arg(long, requires = "gamma", allow_hyphen_values = true)]
    pub e0: Option<f64>,
    #[arg(long, requires = "e0")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Relative tolerance.
    #[arg(long, env = "PTR_TOL", default_value_t = crate::linalg::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// Parity matrix JSON file for an explicit symmetry check.
    #[arg(long)]
    pub parity: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long, value_enum, default_value = "hermitian-representative")]
    pub policy: PolicyArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TimeGrid {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t_start: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub t_stop: f64,
    #[arg(long, default_value_t = 201)]
    pub t_points: usize,
}

impl TimeGrid {
    fn build(&self) -> crate::Result<Vec<f64>> {
        linspace(self.t_start, self.t_stop, self.t_points)
            .map_err(|e| Error::InvalidGrid(format!("--t-start/--t-stop/--t-points: {e}")))
    }
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long, conflicts_with_all = ["input", "s"], requires = "e0")]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub source: MatrixSource,
    /// Metric JSON file (a metric report or a plain matrix).
    #[arg(long)]
    pub metric: Option<PathBuf>,
    /// Initial state as a flat list re0,im0,re1,im1,...; defaults to the last basis vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub psi0: Option<Vec<f64>>,
    #[command(flatten)]
    pub times: TimeGrid,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ResponseArgs {
    #[arg(long, value_enum, default_value = "pt-pair")]
    pub kind: KindArg,
    #[arg(long, allow_hyphen_values = true)]
    pub e0: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Energy grid; defaults to 2001 points over E0 +- 20 gamma.
    #[arg(long, requires = "grid_stop", allow_hyphen_values = true)]
    pub grid_start: Option<f64>,
    #[arg(long, requires = "grid_start", allow_hyphen_values = true)]
    pub grid_stop: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
    /// Write the pole/residue model JSON here.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Write the time-domain propagator CSV here.
    #[arg(long)]
    pub time_output: Option<PathBuf>,
    #[command(flatten)]
    pub times: TimeGrid,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OdeArgs {
    #[arg(long, value_enum, default_value = "pt")]
    pub equation: EquationArg,
    #[arg(long, allow_hyphen_values = true)]
    pub e0: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Initial data re_psi,im_psi,re_dpsi,im_dpsi; defaults to the canonical preset.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 5.0)]
    pub t_stop: f64,
    #[arg(long, default_value_t = 501)]
    pub t_points: usize,
    #[command(flatten)]
    pub common: Common,
}

/// A failed command: the message for stderr and the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Defective { .. } => EXIT_EXCEPTIONAL,
        Error::EmptyIntertwinerSpace | Error::NoInvertibleMetric { .. } | Error::GaugeUnavailable(_) => EXIT_NO_METRIC,
        Error::Overflow { .. } => EXIT_OVERFLOW,
        Error::NotSymmetric { .. } => EXIT_BROKEN,
        _ => EXIT_INPUT,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

/// Prefix a flag or file name to an error while keeping its exit code.
fn context(what: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure {
        code: exit_code(&e),
        message: format!("{what}: {e}"),
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn read_matrix(path: &Path) -> std::result::Result<ComplexMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    ComplexMatrix::from_json(&text).map_err(context(&path.display().to_string()))
}

fn write_output(path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| input_error(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_format(common: &Common, allowed: Format) -> std::result::Result<(), Failure> {
    match common.format {
        Some(f) if f != allowed => Err(input_error(format!(
            "--format: this command only writes {}",
            if allowed == Format::Json { "json" } else { "csv" }
        ))),
        _ => Ok(()),
    }
}

fn check_tol(tol: f64) -> std::result::Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::from(Error::InvalidTolerance(tol))).map_err(|f| input_error(format!("--tol: {}", f.message)))
    }
}

fn load_hamiltonian(src: &MatrixSource) -> std::result::Result<ComplexMatrix, Failure> {
    if let Some(path) = &src.input {
        return read_matrix(path);
    }
    if let Some(s) = src.s {
        return ComplexMatrix::two_level(s).map_err(context("--s"));
    }
    if let (Some(e0), Some(gamma)) = (src.e0, src.gamma) {
        return ComplexMatrix::conjugate_pair(e0, gamma).map_err(context("--e0/--gamma"));
    }
    Err(input_error("one of --input, --s or --e0/--gamma is required".into()))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    text.push('\n');
    text
}

fn cmd_classify(args: &ClassifyArgs) -> CmdResult {
    require_format(&args.common, Format::Json)?;
    check_tol(args.common.tol)?;
    let h = load_hamiltonian(&args.source)?;
    let sys = eig(&h, args.common.tol)?;
    let mut report = classify_eigensystem(&sys, args.common.tol)?;
    if let Some(path) = &args.parity {
        let parity = read_matrix(path)?;
        let sym = AntilinearSymmetry::new(parity).map_err(context("--parity"))?;
        let check = check_pt(&h, &sym, args.common.tol).map_err(context("--parity"))?;
        report.broken_antilinearity |= !check.symmetric;
    }
    write_output(args.common.output.as_deref(), &json(&report))?;
    Ok(if report.is_exceptional() {
        EXIT_EXCEPTIONAL
    } else if report.broken_antilinearity || !report.unmatched.is_empty() {
        EXIT_BROKEN
    } else {
        EXIT_OK
    })
}

fn cmd_metric(args: &MetricArgs) -> CmdResult {
    require_format(&args.common, Format::Json)?;
    check_tol(args.common.tol)?;
    let h = load_hamiltonian(&args.source)?;
    let sys = eig(&h, args.common.tol)?;
    let space = solve_intertwiner(&h, DEFAULT_NULL_TOL)?;
    let policy = match args.policy {
        PolicyArg::HermitianRepresentative => MetricPolicy::HermitianRepresentative,
        PolicyArg::PaperGauge => MetricPolicy::PaperGauge,
        PolicyArg::FirstBasis => MetricPolicy::FirstBasis,
    };
    let metric = build_metric(&sys, &space, policy)?;
    write_output(args.common.output.as_deref(), &json(&metric))?;
    Ok(EXIT_OK)
}

fn parse_complex_list(flag: &str, flat: &[f64]) -> std::result::Result<Vec<C64>, Failure> {
    if !flat.len().is_multiple_of(2) || flat.is_empty() {
        return Err(input_error(format!(
            "{flag}: expected an even number of values (re,im pairs), got {}",
            flat.len()
        )));
    }
    if let Some(i) = flat.iter().position(|x| !x.is_finite()) {
        return Err(input_error(format!("{flag}: value {i} is not finite")));
    }
    Ok(flat.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

fn cmd_evolve(args: &EvolveArgs) -> CmdResult {
    require_format(&args.common, Format::Csv)?;
    check_tol(args.common.tol)?;
    let h = match args.preset {
        Some(preset) => {
            let (e0, gamma) = (args.source.e0, args.source.gamma);
            let (e0, gamma) = e0.zip(gamma).ok_or_else(|| input_error("--preset needs --e0 and --gamma".into()))?;
            match preset {
                Preset::TwoLevel => ComplexMatrix::conjugate_pair(e0, gamma).map_err(context("--e0/--gamma"))?,
                Preset::Hermitian => {
                    let (a, b) = (C64::new(e0, 0.0), C64::new(gamma, 0.0));
                    ComplexMatrix::from_rows(&[vec![a, b], vec![b, a]]).map_err(context("--e0/--gamma"))?
                }
            }
        }
        None => load_hamiltonian(&args.source)?,
    };
    let n = h.dim();
    let psi0 = match &args.psi0 {
        Some(flat) => {
            let values = parse_complex_list("--psi0", flat)?;
            if values.len() != n {
                return Err(input_error(format!("--psi0: expected {n} components, got {}", values.len())));
            }
            DVector::from_vec(values)
        }
        None => {
            let mut v = DVector::zeros(n);
            v[n - 1] = C64::new(1.0, 0.0);
            v
        }
    };
    let metric = args.metric.as_deref().map(read_matrix).transpose()?;
    let times = args.times.build()?;
    let sys = eig(&h, args.common.tol)?;
    let trajectory = evolve_with(&sys, &psi0, &times, metric.as_ref()).map_err(|e| match e {
        Error::DimensionMismatch { .. } => input_error(format!("--metric: {e}")),
        other => other.into(),
    })?;
    write_output(args.common.output.as_deref(), &trajectory.to_csv())?;
    Ok(EXIT_OK)
}

fn cmd_response(args: &ResponseArgs) -> CmdResult {
    let p = ResonanceParams::new(args.e0, args.gamma).map_err(context("--e0/--gamma"))?;
    let kind = match args.kind {
        KindArg::BreitWigner => PropagatorKind::BreitWigner,
        KindArg::PtPair => PropagatorKind::PtPair,
    };
    let model = build_model(kind, &p);
    if let Some(path) = &args.time_output {
        let times = args.times.build()?;
        let values = time_response(&model, &times)?;
        write_output(Some(path), &time_response_csv(&times, &values))?;
    }
    if args.common.format == Some(Format::Json) {
        write_output(args.common.output.as_deref(), &(model.to_json() + "\n"))?;
        return Ok(EXIT_OK);
    }
    let energies = match (args.grid_start, args.grid_stop) {
        (Some(a), Some(b)) => linspace(a, b, args.grid_points)
            .map_err(|e| input_error(format!("--grid-start/--grid-stop/--grid-points: {e}")))?,
        _ if args.grid_points != 2001 => linspace(p.e0 - 20.0 * p.gamma, p.e0 + 20.0 * p.gamma, args.grid_points)
            .map_err(|e| input_error(format!("--grid-points: {e}")))?,
        _ => p.default_energy_grid(),
    };
    let curve = response_curve(kind, &p, &energies)?;
    if let Some(path) = &args.model {
        write_output(Some(path), &(model.to_json() + "\n"))?;
    }
    write_output(args.common.output.as_deref(), &curve.to_csv())?;
    Ok(EXIT_OK)
}

fn cmd_ode(args: &OdeArgs) -> CmdResult {
    require_format(&args.common, Format::Csv)?;
    let p = ResonanceParams::new(args.e0, args.gamma).map_err(context("--e0/--gamma"))?;
    let kind = match args.equation {
        EquationArg::Pt => EquationKind::Pt,
        EquationArg::Damped => EquationKind::Damped,
    };
    let (psi0, dpsi0) = match &args.init {
        Some(flat) => {
            let values = parse_complex_list("--init", flat)?;
            if values.len() != 2 {
                return Err(input_error(format!("--init: expected 4 values, got {}", flat.len())));
            }
            (values[0], values[1])
        }
        None => canonical_initial(kind, &p),
    };
    let times = linspace(0.0, args.t_stop, args.t_points)
        .map_err(|e| input_error(format!("--t-stop/--t-points: {e}")))?;
    let ivp = SecondOrderIvp {
        equation: wave_equation(kind, &p),
        psi0,
        dpsi0,
        times,
        step: args.step,
    };
    let series = integrate(&ivp).map_err(|e| match e {
        Error::StepTooLarge { .. } | Error::InvalidParameter(_) => input_error(format!("--step: {e}")),
        other => other.into(),
    })?;
    write_output(args.common.output.as_deref(), &series.to_csv())?;
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> std::result::Result<i32, Failure> {
    match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Metric(a) => cmd_metric(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Response(a) => cmd_response(a),
        Command::Ode(a) => cmd_ode(a),
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
