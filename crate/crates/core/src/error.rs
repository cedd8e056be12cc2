use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e}, trace {trace:.3e})")]
    NotPsd { min_eig: f64, trace: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate geometry: separation {distance:.3e} m is below 1e-6 m")]
    DegenerateGeometry { distance: f64 },

    #[error("innovation covariance is numerically singular (condition {condition:.3e})")]
    SingularInnovationCov { condition: f64 },

    #[error("belief covariance is not invertible")]
    DegenerateBelief,

    #[error("saddle iteration did not converge: gap {gap:.3e} after {iters} iterations")]
    SaddleNotConverged { gap: f64, iters: usize },

    #[error("log-det ascent did not converge after {iters} iterations (best objective {best:.6e})")]
    SolverNotConverged { best: f64, iters: usize },

    #[error("singular position covariance at run {run}, step {t}")]
    SingularCovariance { run: usize, t: usize },

    #[error("no belief reply from agent {target} for request by agent {observer} at step {t}")]
    MissingReply { observer: usize, target: usize, t: usize },

    #[error("unknown measurement model kind `{0}`")]
    UnknownModelKind(String),

    #[error("invalid scenario at `{path}`: {message}")]
    Scenario { path: String, message: String },

    #[error("update failed in run {run}, step {t}, event {event}: {source}")]
    Update {
        run: usize,
        t: usize,
        event: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn scenario(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scenario {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
