use thiserror::Error;

/// Failure modes shared by every module of the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation inadequate: {0}")]
    Truncation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("integration step unstable at t = {time}: drift {drift:.3e}")]
    StepUnstable { time: f64, drift: f64 },

    #[error("ill-conditioned spectral problem: {0}")]
    IllConditioned(String),

    #[error("root separation violated: distance {distance:.4} < {threshold}")]
    SeparationViolation { distance: f64, threshold: f64 },

    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("finite-difference step too coarse: {0}")]
    StepTooCoarse(String),

    #[error("leakage out of the decoherence-free subspace too large: {0:.4e}")]
    LeakageExcess(f64),

    #[error("coherence lost: |M_ij| = {0:.3e} below threshold")]
    CoherenceLost(f64),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Validation failures map to exit code 1, numerical failures to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Io { .. }
                | Error::InvalidSpec(_)
                | Error::InvalidState(_)
                | Error::DimensionMismatch { .. }
                | Error::SeparationViolation { .. }
                | Error::DegenerateInput(_)
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
