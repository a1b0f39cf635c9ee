use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("vehicle index {k} out of range 0..={n}")]
    Index { k: usize, n: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("time {t} is not on the step grid of dt = {dt}")]
    Grid { t: f64, dt: f64 },

    #[error("exponent fit failed: {0}")]
    Fit(String),

    #[error("unsupported scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors the CLI reports with the configuration exit code.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Parameter(_)
                | Error::Grid { .. }
                | Error::Scenario(_)
                | Error::Json(_)
        )
    }
}
