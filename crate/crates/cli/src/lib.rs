//! Front end for `mlag-core`: config ingestion, the five subcommands and
//! CSV/OBJ/JSON export.

pub mod commands;
pub mod config;
pub mod output;

use mlag_core::{Error, SurfaceClass};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Degenerate { class: SurfaceClass, message: String },
    VerificationFailed(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Degenerate { .. } => EXIT_DEGENERATE,
            CliError::VerificationFailed(_) => EXIT_VERIFY,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn degenerate(class: SurfaceClass) -> Self {
        let message = match class {
            SurfaceClass::TotallyGeodesic => "psi = 0: the surface is totally geodesic",
            SurfaceClass::FlatClifford => "a1 = |psi|^(2/3): the flat Clifford torus, handled separately",
            SurfaceClass::HyperplaneDegenerateLambda => "Re(lambda^-3 psi) = 0: the surface lies in a hyperplane",
            SurfaceClass::Generic => "generic",
        };
        CliError::Degenerate {
            class,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Degenerate { class, message } => write!(f, "degenerate surface class {class:?}: {message}"),
            CliError::VerificationFailed(m) => write!(f, "verification failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Degenerate { class } => CliError::degenerate(class),
            Error::Domain(m) | Error::Precondition(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
