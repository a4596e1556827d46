//! Command-line front end.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage error. Artifacts
//! go to `--out`, else `$ISOSPEC_OUT_DIR`, else the working directory, and
//! every artifact echoes the resolved configuration.

mod corpus;
mod report;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use corpus::{default_specs, resolve as resolve_domain};
pub use report::{verify, RunConfig, StageCheck, VerificationReport};

pub const OUT_DIR_ENV: &str = "ISOSPEC_OUT_DIR";
pub const DEFAULT_H: [f64; 3] = [0.08, 0.04, 0.02];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{stage}: {reason}")]
    Compute { stage: &'static str, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute { .. } => 1,
        }
    }

    pub(crate) fn compute(stage: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Compute {
            stage,
            reason: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Sigma,
    Convergence,
    Eigenfunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorArg {
    Laplace,
    Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerArg {
    Cholesky,
    Cg,
}

#[derive(Debug, Parser)]
#[command(name = "isospec", version, about = "Neumann eigenvalues of even poly-Laplacians and isoperimetric bounds")]
pub struct Cli {
    /// Worker threads; 0 uses all cores, 1 is the reproducible serial mode.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output directory (default `$ISOSPEC_OUT_DIR`, else `.`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write SVG plots next to the artifacts.
    #[arg(long, global = true)]
    pub plots: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct FemArgs {
    /// Mesh sizes, coarse to fine.
    #[arg(long = "h", value_delimiter = ',', default_values_t = DEFAULT_H)]
    pub h: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Relative eigen-residual tolerance.
    #[arg(long, default_value_t = crate::fem::RESIDUAL_TOL)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact Neumann eigenvalues of a ball.
    Ball {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// FEM study, trial certificate and the inequality check for one domain.
    Verify {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[command(flatten)]
        fem: FemArgs,
        /// Cross-check the FEM value with the method of particular solutions.
        #[arg(long)]
        mps: bool,
        #[arg(long, default_value_t = 30)]
        terms: usize,
    },
    /// FEM convergence study for the Laplacian or `Delta^{2m}`.
    Fem {
        #[arg(long)]
        domain: String,
        #[arg(long, value_enum, default_value_t = OperatorArg::Poly)]
        operator: OperatorArg,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[command(flatten)]
        fem: FemArgs,
        #[arg(long)]
        lumped: bool,
        #[arg(long, value_enum, default_value_t = InnerArg::Cholesky)]
        inner: InnerArg,
        /// Write the first eigenfunction on the finest mesh.
        #[arg(long)]
        dump: bool,
    },
    /// Method of particular solutions scan over a frequency window.
    Mps {
        #[arg(long)]
        domain: String,
        #[arg(long, value_enum, default_value_t = OperatorArg::Laplace)]
        operator: OperatorArg,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 30)]
        terms: usize,
    },
    /// Trial-function upper-bound certificate.
    Certify {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Triangulate a domain.
    Mesh {
        #[arg(long)]
        domain: String,
        #[arg(long = "h", default_value_t = 0.1)]
        h: f64,
    },
    /// Render an artifact as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Output file (default: input with an `.svg` extension).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Verify every domain of the built-in corpus.
    Corpus {
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[command(flatten)]
        fem: FemArgs,
        /// Print the corpus specs and exit.
        #[arg(long)]
        list: bool,
    },
}

/// Parse `args` (including the program name) and run, returning the exit
/// code. Messages go to stdout, errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command; returns the summary lines printed on success.
pub fn execute(cli: &Cli) -> Result<Vec<String>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    pool.install(|| report::dispatch(cli))
}

pub(crate) fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub(crate) fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::compute("output", format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::compute("output", format!("{}: {e}", path.display())))?;
    Ok(path)
}
