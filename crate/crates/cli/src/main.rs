//! `laguerre`: simulate the process, tabulate its laws, run the Monte Carlo
//! verification suite.

mod commands;
mod config;
mod output;
mod suite;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::CommonArgs;

#[derive(Debug, Parser)]
#[command(name = "laguerre", version, about = "Batch driver for the Laguerre (complex Wishart) process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Ordered eigenvalues
    Eigen,
    /// Full matrix, upper triangle
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    /// E exp(-tr(u X_t)) over a grid of t
    Laplace,
    /// Transition density w.r.t. the flat Hermitian measure, at diagonal points
    Density,
    /// Density of the ordered eigenvalues
    Qt,
    /// Hartman-Watson type density over a grid of v
    Hw,
    /// P(T0 > t) over a grid of t
    T0,
    /// Density of S0 = 1/(2 T0) over a grid of u
    S0,
    /// E det(X_t)^s over a grid of s
    Detmoment,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate paths and write one CSV per path
    Simulate {
        #[arg(long, value_enum, default_value_t = Scheme::Eigen)]
        scheme: Scheme,
    },
    /// Evaluate a closed-form law on a grid
    Law {
        #[arg(value_enum)]
        law: Law,
        /// Diagonal of the Laplace argument u
        #[arg(long, value_delimiter = ',')]
        u: Option<Vec<f64>>,
        /// Hartman-Watson parameters, one or two values
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
    },
    /// Run the verification suite, or the named checks
    Verify {
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
        /// List the checks and exit
        #[arg(long)]
        list: bool,
    },
    /// Matrix-argument pFq by the zonal series and by the determinant
    Hypergeom {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        a: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        b: Option<Vec<f64>>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(#[from] laguerre_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Numeric(_) | CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.common.config {
        Some(path) => config::merge(cli.common.clone(), &config::read_config_file(path)?)?,
        None => cli.common.clone(),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set up {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Simulate { scheme } => commands::simulate(&common, scheme),
        Command::Law { law, u, lambda } => commands::law(&common, law, u.as_deref(), lambda.as_deref()),
        Command::Verify { checks, list } => {
            if list {
                suite::list();
                return Ok(());
            }
            commands::verify(&common, &checks)
        }
        Command::Hypergeom { a, b } => commands::hypergeom(&common, a.as_deref().unwrap_or(&[]), b.as_deref().unwrap_or(&[])),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("laguerre: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
