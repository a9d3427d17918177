use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value handed to a constructor is malformed (nonpositive scale,
    /// weights not summing to one, empty grids, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was asked to evaluate outside its mathematical domain,
    /// e.g. a density-normalized process at a point where `f(z) = 0`.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of refinement depth.
    #[error("quadrature did not converge: requested tolerance {requested:e}, achieved {achieved:e}")]
    Quadrature { requested: f64, achieved: f64 },

    /// The distance solver exhausted its iteration budget. The best
    /// certified bracket for the answer is carried along.
    #[error("solver did not converge after {iterations} iterations; best bounds [{lower}, {upper}]")]
    Solver {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    /// Experiment configuration rejected during validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
