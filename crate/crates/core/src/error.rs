use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("grid mismatch: field has {got} values, grid has {expected} nodes")]
    GridMismatch { expected: usize, got: usize },

    /// Banded solve hit a zero pivot.
    #[error("singular banded system at row {row}")]
    Singular { row: usize },

    #[error("step failed at t = {t}: {reason}")]
    Step { t: f64, reason: String },

    #[error("unstable step at t = {t}: |v| drifted by {drift:.3e} before renormalization; reduce dt")]
    Instability { t: f64, drift: f64 },

    #[error("gauge frame degenerated at node {node}: |Re e| drift {drift:.3e}")]
    Gauge { node: usize, drift: f64 },

    #[error("reconstruction did not contract: {0}")]
    Reconstruction(String),

    #[error("map is not in Sigma_m: {0}")]
    NotInSigma(String),

    #[error("modulation fit failed: {0}")]
    Fit(String),

    #[error("modulation diagnostic degraded: {0}")]
    Diagnostic(String),

    #[error("prediction window exceeds the grid; largest usable t is {max_t:.6e}")]
    Truncation { max_t: f64 },

    #[error("initial data rejected: {0}")]
    Builder(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// Stable machine-readable code, used in CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "E_CONFIG",
            Error::Argument(_) => "E_ARGUMENT",
            Error::GridMismatch { .. } => "E_GRID_MISMATCH",
            Error::Singular { .. } => "E_SINGULAR",
            Error::Step { .. } => "E_STEP",
            Error::Instability { .. } => "E_INSTABILITY",
            Error::Gauge { .. } => "E_GAUGE",
            Error::Reconstruction(_) => "E_RECONSTRUCTION",
            Error::NotInSigma(_) => "E_NOT_IN_SIGMA",
            Error::Fit(_) => "E_FIT",
            Error::Diagnostic(_) => "E_DIAGNOSTIC",
            Error::Truncation { .. } => "E_TRUNCATION",
            Error::Builder(_) => "E_BUILDER",
            Error::Io(_) => "E_IO",
            Error::Parse { .. } => "E_PARSE",
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Argument(_) | Error::Parse { .. } | Error::Builder(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
