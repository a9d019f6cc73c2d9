use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("weighted combination norm {norm:e} below threshold (antiparallel beamformers)")]
    DegenerateCombination { norm: f64 },

    #[error("beamformer for AP {ap} failed: {source}")]
    Beamformer {
        ap: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trial {trial} failed at rho={rho}: {source}")]
    Trial {
        trial: usize,
        rho: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} trials failed; first: {first}")]
    Campaign {
        failed: usize,
        total: usize,
        first: Box<Error>,
    },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// True for mistakes in the experiment description rather than in its
    /// execution.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Parse { .. } | Error::UnknownParameter(_))
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
