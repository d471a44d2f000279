use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mlag_cli::commands::{self, Command};
use mlag_cli::config::{parse_pair, JobConfig, Overrides};
use mlag_cli::CliError;

#[derive(Parser)]
#[command(name = "mlag", version, about = "Equivariant minimal Lagrangian surfaces in CP2")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Job configuration (TOML with sections).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,

    /// Spectral parameter.
    #[arg(long, global = true, value_name = "RE,IM", value_parser = parse_pair, allow_hyphen_values = true)]
    lambda: Option<[f64; 2]>,

    /// Largest denominator accepted by rationality certificates.
    #[arg(long = "max-den", global = true, value_name = "N")]
    max_den: Option<i64>,

    /// Rationality tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,

    /// Maximum of the conformal factor.
    #[arg(long, global = true, value_name = "X")]
    a1: Option<f64>,

    /// Cubic differential coefficient.
    #[arg(long, global = true, value_name = "RE,IM", value_parser = parse_pair, allow_hyphen_values = true)]
    psi: Option<[f64; 2]>,

    /// Print the effective configuration to stderr.
    #[arg(long, global = true)]
    echo_config: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derived constants and the eigenvalue table.
    Derive,
    /// Run the invariant suites.
    Verify {
        /// Debug: use the principal cube-root branch for kappa.
        #[arg(long, hide = true)]
        corrupt_kappa: bool,
    },
    /// Sample the lift on the configured grid.
    Sample,
    /// Cylinder or torus classification at lambda.
    Classify {
        /// Candidate cylinder period.
        #[arg(long, value_name = "RE,IM", value_parser = parse_pair, allow_hyphen_values = true)]
        omega: Option<[f64; 2]>,
    },
    /// Classify every lambda of the configured sweep.
    Sweep,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => JobConfig::load(p)?,
        None => JobConfig::default(),
    };
    let (cmd, omega, corrupt_kappa) = match cli.cmd {
        Cmd::Derive => (Command::Derive, None, false),
        Cmd::Verify { corrupt_kappa } => (Command::Verify, None, corrupt_kappa),
        Cmd::Sample => (Command::Sample, None, false),
        Cmd::Classify { omega } => (Command::Classify, omega, false),
        Cmd::Sweep => (Command::Sweep, None, false),
    };
    cfg.apply(&Overrides {
        a1: cli.a1,
        psi: cli.psi,
        lambda: cli.lambda,
        max_den: cli.max_den,
        tol: cli.tol,
        out: cli.out,
        json: cli.json,
        omega,
        corrupt_kappa,
    });
    if cli.echo_config {
        eprint!("{}", cfg.echo());
    }
    let job = cfg.resolve()?;
    let out = commands::run(cmd, &job, &cfg)?;
    match &job.path {
        Some(p) => std::fs::write(p, &out.body).map_err(|e| CliError::Runtime(format!("cannot write {p}: {e}")))?,
        None => print!("{}", out.body),
    }
    if let Some(n) = &out.note {
        eprintln!("{n}");
    }
    Ok(out.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
