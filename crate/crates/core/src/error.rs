use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Position of a token in DSL source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate group name `{0}`")]
    DuplicateGroup(String),
    #[error("group `{0}` has zero dimension")]
    ZeroDimension(String),
    #[error("sensorimotor space has no channels")]
    EmptySpace,
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("channel index {index} out of range for group `{group}` (dim {dim})")]
    ChannelOutOfRange { group: String, index: usize, dim: usize },
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("episode {0} is closed; episodes are append-only and ids must increase")]
    ClosedEpisode(u64),
    #[error("space mismatch: `{0}` vs `{1}`")]
    SpaceMismatch(String, String),
    #[error("{pos}: {msg}")]
    Parse { pos: Pos, msg: String },
    #[error("invalid tapping `{name}`: {msg}")]
    InvalidTapping { name: String, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("csv {path}: {msg}")]
    Csv { path: String, msg: String },
    #[error("singular normal matrix; use ridge > 0")]
    Singular,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no dependency detected")]
    NoDependency,
    #[error("taps outside the drawing window: {0}")]
    OutsideWindow(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> Self {
        Error::Csv { path: path.to_string(), msg: msg.to_string() }
    }
}
