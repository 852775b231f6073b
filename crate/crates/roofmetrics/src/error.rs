use std::path::PathBuf;

use crate::register::RegistrationResult;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty cloud: {0}")]
    EmptyCloud(&'static str),

    #[error("empty surface: mesh has no non-degenerate triangles")]
    EmptySurface,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("underdetermined: {0}")]
    Underdetermined(String),

    #[error("no overlap: zero correspondences within {max_distance} m at iteration {iteration}")]
    NoOverlap {
        max_distance: f64,
        iteration: usize,
        /// Best state reached before correspondences ran out.
        last_valid: Box<RegistrationResult>,
    },

    #[error("{path}:{location}: {message}")]
    Parse {
        path: PathBuf,
        /// Line number (text formats) or byte offset (binary formats).
        location: ParseLocation,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy)]
pub enum ParseLocation {
    Line(usize),
    Byte(u64),
}

impl std::fmt::Display for ParseLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseLocation::Line(n) => write!(f, "line {n}"),
            ParseLocation::Byte(n) => write!(f, "byte {n}"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
