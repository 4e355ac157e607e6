use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use aniso_tv::gallery::GalleryError;
use aniso_tv::icheck::IcError;
use aniso_tv::solve::SolveError;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Failed(String),
    #[error("writing {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => EXIT_USAGE,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CliError::Failed(_) | CliError::Output { .. } => EXIT_FAILED,
        }
    }
}

impl From<GalleryError> for CliError {
    fn from(e: GalleryError) -> Self {
        match e {
            GalleryError::UnknownScenario(_) | GalleryError::InvalidOverride { .. } => CliError::Usage(e.to_string()),
            GalleryError::Solve(s) => s.into(),
            GalleryError::Ic(i) => i.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotConverged { .. } | SolveError::UnboundedDetected { .. } => CliError::NotConverged(e.to_string()),
            SolveError::InvalidConfig(_) | SolveError::Grid(_) | SolveError::TooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

impl From<IcError> for CliError {
    fn from(e: IcError) -> Self {
        match e {
            IcError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub fn read_text(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.into(),
        message: e.to_string(),
    })
}

/// Parses inline JSON when the argument starts with `{` or `[`, otherwise
/// reads the named file.
pub fn json_arg<T: DeserializeOwned>(arg: &str) -> Result<T, CliError> {
    let (label, text) = if arg.trim_start().starts_with(['{', '[']) {
        ("<inline>".to_string(), arg.to_string())
    } else {
        (arg.to_string(), read_text(arg)?)
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: label,
        message: e.to_string(),
    })
}

/// Writes pretty JSON to `out`, or to standard output.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match out {
        Some(p) => fs::write(p, text + "\n").map_err(|source| CliError::Output {
            path: p.display().to_string(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Seed from `ANISO_TV_SEED` when set, else `fallback`.
pub fn seed(fallback: u64) -> Result<u64, CliError> {
    match std::env::var("ANISO_TV_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("ANISO_TV_SEED must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(fallback),
    }
}
