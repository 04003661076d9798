//! The `krn` command line. Every subcommand is a function from parsed flags to
//! an [`Outcome`], so the binary and the tests share one code path.

use std::ffi::OsString;

use clap::{Parser, Subcommand};
use krn_core::laws::bayes_dagger;
use krn_core::Error;

pub mod bayes;
pub mod converge;
pub mod dagger;
pub mod netkat;
pub mod selftest;

pub const EXIT_OK: u8 = 0;
pub const EXIT_SELFTEST: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// What a command printed and how it exited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    pub fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    pub fn fail(code: u8, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Errors of the command layer, carrying their exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = format!("error: {e}");
        match e {
            Error::TailMassTooLarge { .. }
            | Error::QuadratureFailure { .. }
            | Error::StateBudgetExceeded { .. }
            | Error::PairBudgetExceeded { .. }
            | Error::TransientMassNotDrained { .. }
            | Error::Singular(_)
            | Error::AbsoluteContinuityViolation { .. } => CliError::Numeric(message),
            _ => CliError::Usage(message),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "krn", version, about = "Finite Markov kernels, Bayesian inversion and their approximations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate Gaussian posterior by inverting a discretized likelihood.
    Bayes(bayes::BayesArgs),
    /// Bayesian inversion of a kernel stored as JSON.
    Dagger(dagger::DaggerArgs),
    /// Convergence sweep of discretized kernels along a refinement chain.
    Converge(converge::ConvergeArgs),
    /// Path-union queries for a program with one Kleene star.
    Netkat(netkat::NetkatArgs),
    /// Randomized checks of the algebraic laws.
    Selftest(selftest::SelftestArgs),
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::fail(EXIT_USAGE, text)
            } else {
                Outcome::ok(text)
            };
        }
    };
    let result = match cli.command {
        Command::Bayes(a) => bayes::run(&a),
        Command::Dagger(a) => dagger::run(&a),
        Command::Converge(a) => converge::run(&a),
        Command::Netkat(a) => netkat::run(&a),
        Command::Selftest(a) => return selftest::run(&a, bayes_dagger),
    };
    match result {
        Ok(stdout) => Outcome::ok(stdout),
        Err(e) => Outcome::fail(e.code(), e.message()),
    }
}

/// Parses `a,b` into a pair of finite reals.
pub fn parse_pair(text: &str) -> std::result::Result<(f64, f64), String> {
    let values = parse_reals(text)?;
    match values[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected two comma-separated numbers, got {text:?}")),
    }
}

fn parse_reals(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("{s:?} is not finite"))
            }
        })
        .collect()
}
