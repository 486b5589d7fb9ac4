use std::path::PathBuf;

/// Errors raised by the solvers, diagnostics and persistence layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate exponent m = {0}: the porous medium equation needs m > 1")]
    DegenerateExponent(f64),

    #[error("shooting oracle failed: {reason} (bisection bracket [{lo:e}, {hi:e}])")]
    OracleFailure { reason: String, lo: f64, hi: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    ConvergenceFailure {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("time step {dt:e} exceeds the stability bound {limit:e}")]
    Stability { dt: f64, limit: f64 },

    #[error("scheme produced {value:e} at node ({i}, {j})")]
    SchemeFailure { value: f64, i: usize, j: usize },

    #[error("numerical support came within {guard} nodes of the y-end at tau = {time}; enlarge the y extent")]
    TruncationGuard { guard: usize, time: f64 },

    #[error("inadmissible initial datum: {0}")]
    InadmissibleDatum(String),

    #[error("comoving window too short: front reached the {side} end")]
    WindowTooShort { side: &'static str },

    #[error("degenerate profile: row {row} has an empty positivity set")]
    DegenerateProfile { row: usize },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("barrier integration left (0, 1) at tau = {tau}")]
    IntegrationFailure { tau: f64 },

    #[error("out of range: {0}")]
    Range(String),

    #[error("gap below 1e-14 at tau = {tau}; fit window starts too late")]
    WindowTooLate { tau: f64 },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than numerical breakdown or I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DegenerateExponent(_)
                | Error::InadmissibleDatum(_)
                | Error::Range(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
