//! Subcommands of the `fiberframe` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fiberframe_core::{
    alternate_projections, connect, fiber_distance, fiber_residual, flow_to_fiber, frame_bounds, frame_operator,
    is_admissible, is_funtf, is_regular_value, is_tight, momentum_torus, norms_squared, random_frame_on_fiber,
    same_gram_class, unitary_equivalent, validate_path_between, Admissibility, ConnectOptions, FiberTarget,
    FlowOptions, FlowStatus, FrameMatrix, HermitianMatrix, NormSquaredVector, SpectrumSpec,
};
use fiberframe_core::synthesis::{construct_on_fiber, ADMISSIBILITY_TOL};
use serde_json::json;

use crate::io::{self, ComplexJson, ConnectOptionsJson, FlowReportJson, FrameJson};
use crate::report::{CliError, Header, Report};

#[derive(Debug, Parser)]
#[command(name = "fiberframe", version, about = "Frames with prescribed frame operator and norms")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Override the command's main tolerance.
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    /// Print nothing on success; only the exit code reports the outcome.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gradient,
    Alternating,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame bounds, norms, tightness and (optionally) distance to a target fiber.
    Check {
        frame: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
        /// Fail unless the frame is tight.
        #[arg(long)]
        expect_tight: bool,
        /// Fail unless the frame is a unit-norm tight frame.
        #[arg(long)]
        expect_funtf: bool,
    },
    /// Build a frame with the given frame-operator spectrum (or operator) and squared norms.
    Construct {
        /// Frame-operator eigenvalues.
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required_unless_present = "s", conflicts_with = "s")]
        lambda: Option<Vec<f64>>,
        /// Frame operator as a JSON file `{"re": [[..]], "im": [[..]]}`.
        #[arg(long = "S")]
        s: Option<PathBuf>,
        /// Squared column norms.
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        r: Vec<f64>,
        /// Skip randomization: the plain rotation-chain frame, independent of the seed.
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow a frame onto a target fiber (unit-norm tight by default).
    Tighten {
        frame: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Gradient)]
        method: Method,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the flow report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build and validate a path between two frames of one fiber.
    Connect {
        from: PathBuf,
        to: PathBuf,
        /// Fiber to stay on; defaults to the fiber of the first frame.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Largest step between samples, relative to the norm of the first frame.
        #[arg(long, default_value_t = 0.05, value_parser = positive)]
        delta: f64,
        #[arg(long, default_value_t = 5)]
        max_restarts: usize,
        #[arg(long, default_value_t = 12)]
        max_refine_depth: usize,
        /// JSON-lines path file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two frames differ by a left unitary, and recover it.
    Equiv { f1: PathBuf, f2: PathBuf },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Construct { .. } => "construct",
            Command::Tighten { .. } => "tighten",
            Command::Connect { .. } => "connect",
            Command::Equiv { .. } => "equiv",
        }
    }

    fn default_tol(&self) -> f64 {
        match self {
            Command::Check { .. } | Command::Construct { .. } | Command::Connect { .. } => 1e-8,
            Command::Tighten { .. } | Command::Equiv { .. } => 1e-10,
        }
    }

    pub fn header(&self, global: &Global) -> Header {
        let tol = global.tol.unwrap_or_else(|| self.default_tol());
        let tolerances = match self {
            Command::Check { .. } => vec![("tol", tol)],
            Command::Construct { .. } => vec![("tol", tol), ("admissibility_tol", ADMISSIBILITY_TOL)],
            Command::Tighten { .. } => vec![("tol", tol)],
            Command::Connect { delta, .. } => vec![("path_tol", tol), ("delta", *delta)],
            Command::Equiv { .. } => vec![("tol", tol)],
        };
        Header {
            command: self.name(),
            seed: global.seed,
            tolerances,
        }
    }

    fn outputs(&self) -> Vec<&Path> {
        match self {
            Command::Construct { out, .. } | Command::Connect { out, .. } => out.iter().map(PathBuf::as_path).collect(),
            Command::Tighten { out, report, .. } => out.iter().chain(report).map(PathBuf::as_path).collect(),
            _ => Vec::new(),
        }
    }
}

/// Output files must land in an existing directory; checked before any work.
fn check_outputs(paths: &[&Path]) -> Result<(), CliError> {
    for p in paths {
        let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(CliError::Input(format!("{}: directory {} does not exist", p.display(), dir.display())));
        }
    }
    Ok(())
}

pub fn execute(command: &Command, global: &Global) -> Result<Report, CliError> {
    check_outputs(&command.outputs())?;
    let tol = global.tol.unwrap_or_else(|| command.default_tol());
    match command {
        Command::Check {
            frame,
            target,
            expect_tight,
            expect_funtf,
        } => check(frame, target.as_deref(), *expect_tight, *expect_funtf, tol),
        Command::Construct {
            lambda,
            s,
            r,
            deterministic,
            out,
        } => construct(lambda.as_deref(), s.as_deref(), r, *deterministic, out.as_deref(), global.seed, tol),
        Command::Tighten {
            frame,
            target,
            method,
            max_iters,
            out,
            report,
        } => tighten(frame, target.as_deref(), *method, *max_iters, out.as_deref(), report.as_deref(), tol),
        Command::Connect {
            from,
            to,
            target,
            delta,
            max_restarts,
            max_refine_depth,
            out,
        } => {
            let opts = ConnectOptions {
                path_tol: tol,
                delta: *delta,
                max_restarts: *max_restarts,
                max_refine_depth: *max_refine_depth,
                seed: global.seed,
                ..ConnectOptions::default()
            };
            connect_cmd(from, to, target.as_deref(), &opts, out.as_deref())
        }
        Command::Equiv { f1, f2 } => equiv(f1, f2, tol),
    }
}

fn require_shape(f: &FrameMatrix, s: &HermitianMatrix, r: &NormSquaredVector) -> Result<(), CliError> {
    if s.dim() != f.k() || r.len() != f.n() {
        return Err(CliError::Input(format!(
            "target is for {}x{} frames, frame is {}x{}",
            s.dim(),
            r.len(),
            f.k(),
            f.n()
        )));
    }
    Ok(())
}

/// Reads a target and checks it is a regular value with consistent trace.
fn read_target(path: &Path) -> Result<FiberTarget, CliError> {
    let (s, r) = io::read_target_parts(path)?;
    Ok(FiberTarget::new(s, r)?)
}

fn check(
    frame: &Path,
    target: Option<&Path>,
    expect_tight: bool,
    expect_funtf: bool,
    tol: f64,
) -> Result<Report, CliError> {
    let f = io::read_frame(frame)?;
    let target = target.map(io::read_target_parts).transpose()?;
    if let Some((s, r)) = &target {
        require_shape(&f, s, r)?;
    }
    let mut rep = Report::default();
    rep.push("shape", format!("{}x{}", f.k(), f.n()));
    if f.is_frame() {
        let b = frame_bounds(&f, 0.0)?;
        rep.push("frame", true);
        rep.push("frame bounds", json!([b.lower, b.upper]));
    } else {
        rep.push("frame", "not a frame");
        rep.push("singular values", f.singular_values());
        rep.fail();
    }
    rep.push("norms²", norms_squared(&f).values().to_vec());
    let s_f = frame_operator(&f);
    rep.push("spectrum", s_f.eigenvalues());
    let tight = is_tight(&f, tol);
    let funtf = is_funtf(&f, tol);
    rep.push("tight", tight);
    rep.push("FUNTF", funtf);
    rep.push("regular value", is_regular_value(&s_f, &momentum_torus(&f), tol).describe());
    if (expect_tight && !tight) || (expect_funtf && !funtf) {
        rep.fail();
    }
    if let Some((s, r)) = target {
        let regular = is_regular_value(&s, &r.values().iter().map(|x| -0.5 * x).collect::<Vec<_>>(), 0.0);
        rep.push("target regular value", regular.describe());
        let t = FiberTarget::unchecked(s, r);
        let d = fiber_distance(&f, &t)?;
        rep.push("fiber distance", d);
        rep.push("on fiber", d <= tol);
        if d > tol {
            rep.fail();
        }
    }
    Ok(rep)
}

fn construct(
    lambda: Option<&[f64]>,
    s: Option<&Path>,
    r: &[f64],
    deterministic: bool,
    out: Option<&Path>,
    seed: u64,
    tol: f64,
) -> Result<Report, CliError> {
    let s = match (lambda, s) {
        (Some(l), _) => {
            if l.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Input("--lambda values must be finite".into()));
            }
            HermitianMatrix::from_real_diagonal(l)
        }
        (None, Some(path)) => io::read_hermitian(path)?,
        (None, None) => return Err(CliError::Input("one of --lambda or --S is required".into())),
    };
    let r = NormSquaredVector::new(r.to_vec())?;
    let spectrum = SpectrumSpec::of(&s)?;
    if let Admissibility::Violated(v) = is_admissible(&spectrum, &r, ADMISSIBILITY_TOL)? {
        return Err(CliError::Failure(format!("inadmissible: {v}")));
    }
    let target = FiberTarget::new(s, r)?;
    let f = if deterministic {
        construct_on_fiber(&target)?
    } else {
        random_frame_on_fiber(&target, seed)?
    };
    let mut rep = Report::default();
    let spectrum_residual = frame_operator(&f)
        .eigenvalues()
        .iter()
        .zip(spectrum.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let operator_residual = frame_operator(&f).distance(target.s());
    let norm_residual = norms_squared(&f)
        .values()
        .iter()
        .zip(target.r().values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    rep.push("shape", format!("{}x{}", f.k(), f.n()));
    rep.push("spectrum residual", spectrum_residual);
    rep.push("frame operator residual", operator_residual);
    rep.push("norm residual", norm_residual);
    let ok = spectrum_residual.max(operator_residual).max(norm_residual) <= tol;
    rep.push("verified", ok);
    if !ok {
        rep.fail();
    }
    match out {
        Some(path) => {
            io::write_frame(path, &f)?;
            rep.push("written", path.display().to_string());
        }
        None => rep.push("frame", serde_json::to_value(FrameJson::from_frame(&f)).expect("finite")),
    }
    Ok(rep)
}

fn tighten(
    frame: &Path,
    target: Option<&Path>,
    method: Method,
    max_iters: usize,
    out: Option<&Path>,
    report: Option<&Path>,
    tol: f64,
) -> Result<Report, CliError> {
    let f = io::read_frame(frame)?;
    let target = match target {
        Some(p) => read_target(p)?,
        None => FiberTarget::funtf(f.k(), f.n())?,
    };
    require_shape(&f, target.s(), target.r())?;
    let opts = FlowOptions {
        tol,
        max_iters,
        ..FlowOptions::default()
    };
    let initial = fiber_residual(&f, &target)?;
    let (g, flow) = match method {
        Method::Gradient => flow_to_fiber(&f, &target, &opts)?,
        Method::Alternating => alternate_projections(&f, &target, &opts)?,
    };
    let flow_json = FlowReportJson::from(&flow);
    let mut rep = Report::default();
    rep.push("method", format!("{method:?}").to_lowercase());
    rep.push("status", flow.status.as_str());
    rep.push("iterations", flow.iterations);
    rep.push("initial residual", initial);
    rep.push("final residual", flow.final_residual);
    if flow.status != FlowStatus::Converged {
        rep.fail();
    }
    if let Some(path) = report {
        let mut text = serde_json::to_string(&flow_json).expect("finite");
        text.push('\n');
        io::write_text(path, &text)?;
    } else {
        rep.push("flow report", serde_json::to_value(&flow_json).expect("finite"));
    }
    if let Some(path) = out {
        io::write_frame(path, &g)?;
        rep.push("written", path.display().to_string());
    }
    Ok(rep)
}

fn connect_cmd(
    from: &Path,
    to: &Path,
    target: Option<&Path>,
    opts: &ConnectOptions,
    out: Option<&Path>,
) -> Result<Report, CliError> {
    let f0 = io::read_frame(from)?;
    let f1 = io::read_frame(to)?;
    if (f0.k(), f0.n()) != (f1.k(), f1.n()) {
        return Err(CliError::Input(format!(
            "endpoints have shapes {}x{} and {}x{}",
            f0.k(),
            f0.n(),
            f1.k(),
            f1.n()
        )));
    }
    let target = match target {
        Some(p) => read_target(p)?,
        None => FiberTarget::new(frame_operator(&f0), norms_squared(&f0))?,
    };
    require_shape(&f0, target.s(), target.r())?;
    let path = connect(&f0, &f1, &target, opts)?;
    let options = ConnectOptionsJson::new(opts, &f0);
    let check = validate_path_between(&path, &f0, &f1, opts.path_tol, options.delta_abs);
    let mut rep = Report::default();
    rep.push("samples", path.len());
    rep.push("max step", check.max_step.1);
    rep.push("step bound", options.delta_abs);
    rep.push("worst fiber distance", check.worst_residual.1);
    rep.push("valid", check.passed());
    if let Some(failure) = &check.failure {
        rep.push("failure", format!("{failure:?}"));
        rep.fail();
    }
    if let Some(p) = out {
        io::write_text(p, &io::path_to_jsonl(&path, options))?;
        rep.push("written", p.display().to_string());
    }
    Ok(rep)
}

fn equiv(f1: &Path, f2: &Path, tol: f64) -> Result<Report, CliError> {
    let a = io::read_frame(f1)?;
    let b = io::read_frame(f2)?;
    if (a.k(), a.n()) != (b.k(), b.n()) {
        return Err(CliError::Input(format!(
            "frames have shapes {}x{} and {}x{}",
            a.k(),
            a.n(),
            b.k(),
            b.n()
        )));
    }
    let mut rep = Report::default();
    rep.push("same Gram", same_gram_class(&a, &b, tol));
    match unitary_equivalent(&a, &b, tol)? {
        Some(u) => {
            let residual = (b.as_mat() - &(&u * a.as_mat())).norm();
            rep.push("verdict", "equivalent");
            rep.push("residual", residual);
            rep.push("U", serde_json::to_value(ComplexJson::from_mat(&u)).expect("finite"));
        }
        None => {
            rep.push("verdict", "not equivalent");
            rep.fail();
        }
    }
    Ok(rep)
}

/// Parses `args`, runs the command and returns the exit code, writing the
/// report to `stdout` and errors to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { crate::report::EXIT_INPUT } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let header = cli.command.header(&cli.global);
    let result = execute(&cli.command, &cli.global);
    let (report, error) = match result {
        Ok(r) => (r, None),
        Err(e) => (Report::default(), Some(e)),
    };
    let code = error.as_ref().map_or(report.exit_code, CliError::exit_code);
    if cli.global.json {
        if !cli.global.quiet || error.is_some() {
            let _ = writeln!(stdout, "{}", report.json(&header, error.as_ref()));
        }
    } else {
        if !cli.global.quiet {
            let _ = writeln!(stdout, "{}", header.text());
            let _ = write!(stdout, "{}", report.text());
        }
        if let Some(e) = &error {
            let _ = writeln!(stderr, "error: {e}");
        }
    }
    code
}
