use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{asset}: no events")]
    NoEvents { asset: String },

    #[error("{asset}: degenerate series (fewer than two distinct prices)")]
    DegenerateSeries { asset: String },

    #[error("{asset}: event at t={time} lies outside all sessions")]
    OutsideSessions { asset: String, time: f64 },

    #[error("{asset}: series invariant violated: {message}")]
    SeriesInvariant { asset: String, message: String },

    #[error("total duration must be positive")]
    ZeroDuration,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("harmonic count mismatch: expected {expected}, found {found}")]
    HarmonicMismatch { expected: usize, found: usize },

    #[error("{asset}: non-positive variance on the diagonal ({value})")]
    NonPositiveVariance { asset: String, value: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Hermitian eigensolver did not converge for n={n} within {max_iterations} iterations")]
    EigenNoConvergence { n: usize, max_iterations: usize },

    #[error("asset order mismatch: {0}")]
    AssetMismatch(String),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("{what} needs at least {min} nodes, got {n}")]
    TooFewNodes { what: &'static str, n: usize, min: usize },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures of the numerical stages rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::NonPositiveVariance { .. }
                | Error::NotHermitian { .. }
                | Error::EigenNoConvergence { .. }
                | Error::EmptySpectrum
        )
    }
}
