//! Command-line front end. `run` does the work and returns the exit code and
//! the text for stdout, so tests can drive it without a subprocess.

pub mod bundle;
pub mod chain;
mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use thiserror::Error;

pub use commands::run;

/// Exit codes: 0 success, 1 verification failure, 2 invalid input,
/// 3 precondition violated.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Verification(_) => "verification-failed",
            CliError::Invalid(_) => "invalid-input",
            CliError::Precondition(_) => "precondition",
        }
    }

    /// Shape and parse problems are input errors; everything else the
    /// library refuses is a violated precondition.
    pub fn from_lib(e: hermcone::Error, ctx: &str) -> CliError {
        let msg = format!("{ctx}: {e}");
        if e.is_invalid_input() || matches!(e, hermcone::Error::Mismatch(_)) {
            CliError::Invalid(msg)
        } else {
            CliError::Precondition(msg)
        }
    }

    pub fn body(&self) -> serde_json::Value {
        serde_json::json!({ "error": self.kind(), "message": self.to_string(), "exit": self.code() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "hermcone", version, about = "Hermitian complexes, determinant norms and hermitian cones at a point")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Override the meagerness/tightness tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Determinant-norm invariant of an acyclic complex.
    Tau {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Randomized verification suites, one JSON line per check.
    Verify {
        /// acyclic-calculus, triangle-classes, cone-welldef, osm-assoc, genera or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Cases per suite; defaults to 50 for triangle-classes and 200 otherwise.
        #[arg(long)]
        cases: Option<u64>,
        /// Negative control: report this rule as failing.
        #[arg(long, hide = true)]
        corrupt_rule: Option<String>,
    },
    /// Hermitian cone of a morphism between structured objects.
    Cone {
        #[arg(long)]
        bundle: PathBuf,
        /// Structure on the source.
        #[arg(long)]
        source: String,
        /// Structure on the target.
        #[arg(long)]
        target: String,
        /// Roof for the morphism.
        #[arg(long)]
        map: String,
        /// Name of the resulting structure.
        #[arg(long, default_value = "cone")]
        name: String,
    },
    /// Class of an isomorphism; with structures, relative to them.
    ClassIso {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        roof: String,
        #[arg(long, requires = "target")]
        source: Option<String>,
        #[arg(long, requires = "source")]
        target: Option<String>,
    },
    /// Class of a distinguished triangle of structured objects.
    ClassTriangle {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        triangle: String,
    },
    /// `H1 − H2` for two structures on one complex.
    Distance {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Coefficients of x/(1 − e^{−x}).
    Todd {
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// Genus evaluation.
    Genus {
        #[command(subcommand)]
        action: GenusAction,
    },
    /// Compose a chain of tangent-structured morphisms.
    Compose {
        #[arg(long)]
        chain: PathBuf,
        /// Also compare the two bracketings of every consecutive triple.
        #[arg(long)]
        check_assoc: bool,
    },
    /// Emit a small sample input.
    Sample {
        #[arg(value_enum)]
        kind: SampleKind,
        /// Parameter for `ea`.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenusAction {
    /// `c_0 · χ(C)`, and the point class when `C` is acyclic.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        /// A single complex document.
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    /// `e^a` bundle, complex `ea`.
    Ea,
    /// Orthogonally split acyclic complex `meager`.
    Meager,
    /// One-dimensional space in degree 0, complex `point`.
    Point,
    /// Identity roof `id` plus a tight-isomorphism roof `iso`.
    Iso,
    /// Split triangle `t` and two structures `h1`, `h2` on one complex.
    Triangle,
    /// Three composable morphisms with ambient metrics.
    Chain,
    /// Genus spec for the Chern character.
    Genus,
}
