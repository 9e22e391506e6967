//! `fiscids` subcommands. Exit codes: 0 success, 1 pipeline or verification
//! failure, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fiscids_core::expr::parse;
use fiscids_core::integrate::output_at;
use fiscids_core::{catalog, Class, FiscidsSystem, IntegrationConfig, Method, VarId};

use crate::document;
use crate::pipeline::{build, promote};
use crate::verify::{cross_compare, grid_compare, snapshot, write_csv, GridSpec};

#[derive(Debug, Parser)]
#[command(
    name = "fiscids",
    version,
    about = "Build, transform and check constant-input dynamical representations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lift an expression and write the system document.
    Build(BuildArgs),
    /// Rewrite a document as a polynomial or quadratic system.
    Transform(TransformArgs),
    /// Print y(t; xi).
    Eval(EvalArgs),
    /// Compare terminal outputs over a grid.
    Verify(VerifyArgs),
    /// Write outputs at several times over a grid as CSV.
    Snapshot(SnapshotArgs),
    /// Write a built-in system.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassArg {
    #[value(alias = "rational")]
    R,
    #[value(alias = "polynomial")]
    P,
    #[value(alias = "quadratic")]
    Q,
}

impl From<ClassArg> for Class {
    fn from(c: ClassArg) -> Class {
        match c {
            ClassArg::R => Class::Rational,
            ClassArg::P => Class::Polynomial,
            ClassArg::Q => Class::Quadratic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    #[value(alias = "polynomial")]
    P,
    #[value(alias = "quadratic")]
    Q,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExampleName {
    Gaussian,
    Logpoly,
    Tt,
}

#[derive(Debug, Args)]
struct Integration {
    /// Absolute and relative step tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// adaptive_rk45 or fixed_rk4.
    #[arg(long, default_value = "adaptive_rk45", value_parser = parse_method)]
    method: Method,
    /// Step count for fixed_rk4.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_name(s).ok_or_else(|| format!("unknown method `{}`", s))
}

impl Integration {
    fn config(&self) -> IntegrationConfig {
        let mut c = IntegrationConfig {
            method: self.method,
            fixed_steps: self.steps,
            ..Default::default()
        };
        if let Some(t) = self.tol {
            c.abs_tol = t;
            c.rel_tol = t;
        }
        c
    }
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    expr: String,
    #[arg(long, value_delimiter = ',', required = true)]
    vars: Vec<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    base_point: Vec<String>,
    #[arg(long, value_enum, default_value = "r")]
    class: ClassArg,
    #[arg(long, default_value_t = fiscids_core::lift::DEFAULT_CAP)]
    cap: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    to: TargetArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    xi: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[command(flatten)]
    integration: Integration,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("reference").required(true).args(["ref_expr", "against"]))]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Closed form over the document's input names.
    #[arg(long)]
    ref_expr: Option<String>,
    /// Another document with the same n and m.
    #[arg(long)]
    against: Option<PathBuf>,
    /// lo:hi:count per input, comma separated.
    #[arg(long = "box", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 1e-6)]
    max_err: f64,
    #[command(flatten)]
    integration: Integration,
}

#[derive(Debug, Args)]
struct SnapshotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, value_delimiter = ',', required = true)]
    times: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    integration: Integration,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    #[arg(long, value_enum)]
    name: ExampleName,
    /// Stage of the log-polynomial chain.
    #[arg(long, value_enum, default_value = "q")]
    class: ClassArg,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying the exit code.
struct Failure(i32, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(1, e.to_string())
    }
}

fn read_system(path: &Path) -> Result<FiscidsSystem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(1, format!("{}: {}", path.display(), e)))?;
    document::from_str(&text).map_err(|e| Failure(1, format!("{}: {}", path.display(), e)))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure(1, format!("{}: {}", path.display(), e)))
}

fn grid_for(sys: &FiscidsSystem, text: &str) -> Result<GridSpec, Failure> {
    let grid = GridSpec::parse(text).map_err(|e| Failure(2, e.to_string()))?;
    if grid.dim() != sys.n() {
        return Err(Failure(
            2,
            format!("--box has {} axes, system has {} inputs", grid.dim(), sys.n()),
        ));
    }
    Ok(grid)
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Build(a) => {
            let vars: Vec<&str> = a.vars.iter().map(String::as_str).collect();
            let base: Vec<&str> = a.base_point.iter().map(String::as_str).collect();
            let sys = build(&a.expr, &vars, &base, a.class.into(), a.cap)?;
            write_file(&a.out, document::to_string(&sys)?.as_bytes())?;
        }
        Command::Transform(a) => {
            let sys = read_system(&a.input)?;
            let target = match a.to {
                TargetArg::P => Class::Polynomial,
                TargetArg::Q => Class::Quadratic,
            };
            write_file(&a.out, document::to_string(&promote(&sys, target)?)?.as_bytes())?;
        }
        Command::Eval(a) => {
            let sys = read_system(&a.input)?;
            for v in output_at(&sys, &a.xi, a.t, &a.integration.config())? {
                writeln!(out, "{:.16e}", v)?;
            }
        }
        Command::Verify(a) => {
            let sys = read_system(&a.input)?;
            let points = grid_for(&sys, &a.grid)?.points();
            let config = a.integration.config();
            let report = match (&a.ref_expr, &a.against) {
                (Some(text), _) => {
                    let vars = VarId::list(sys.input_names());
                    let phi = parse(text, &vars)?;
                    let reference = |xi: &[f64]| phi.eval(xi).map(|v| vec![v]).map_err(|e| e.to_string());
                    grid_compare(&sys, &reference, &points, &config)
                }
                (None, Some(path)) => cross_compare(&sys, &read_system(path)?, &points, &config)?,
                (None, None) => unreachable!("clap requires one reference"),
            };
            write!(out, "{}", report)?;
            if !report.passed(a.max_err) {
                return Err(Failure(
                    1,
                    format!(
                        "verification failed: max_abs {:.16e}, bound {:.16e}",
                        report.max_abs, a.max_err
                    ),
                ));
            }
        }
        Command::Snapshot(a) => {
            let sys = read_system(&a.input)?;
            let points = grid_for(&sys, &a.grid)?.points();
            let snap = snapshot(&sys, &points, &a.times, &a.integration.config())?;
            let mut buf = Vec::new();
            write_csv(&snap, &mut buf)?;
            write_file(&a.out, &buf)?;
        }
        Command::Example(a) => {
            let sys = match a.name {
                ExampleName::Gaussian => catalog::gaussian(),
                ExampleName::Logpoly => catalog::logpoly(a.class.into()),
                ExampleName::Tt => catalog::tt(),
            };
            let doc = document::to_string(&sys)?;
            match &a.out {
                Some(path) => write_file(path, doc.as_bytes())?,
                None => out.write_all(doc.as_bytes())?,
            }
        }
    }
    Ok(())
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{}", text);
                2
            } else {
                let _ = write!(out, "{}", text);
                0
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {}", msg);
            code
        }
    }
}
