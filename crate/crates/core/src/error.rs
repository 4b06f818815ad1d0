use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("format error in {path}: {message}")]
    Format {
        path: PathBuf,
        message: String,
    },

    #[error("unsupported audio encoding: {0}")]
    UnsupportedAudio(String),

    #[error("incompatible audio specs: {0}")]
    SpecMismatch(String),

    #[error(
        "calibration failed: achieved precision {achieved_precision:.4}, recall {achieved_recall:.4} \
         (targets {target_precision:.4}, {target_recall:.4})"
    )]
    Calibration {
        achieved_precision: f64,
        achieved_recall: f64,
        target_precision: f64,
        target_recall: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 for usage/config errors, 1 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 2,
            _ => 1,
        }
    }
}
