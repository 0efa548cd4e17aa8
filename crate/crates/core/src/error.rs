use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined
    /// (divergent moment, 𝔇 ≤ 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimated relative error {estimate:.3e} above {target:.3e} after {panels} panels")]
    NonConvergence {
        estimate: f64,
        target: f64,
        panels: usize,
    },

    #[error("point at distance {radius} lies outside the chart radius {chart_radius}")]
    Chart { radius: f64, chart_radius: f64 },

    #[error("invalid curvature frame: {0}")]
    InvalidFrame(String),

    #[error("forcing decomposition failed: reconstruction error {0:.3e}")]
    Decomposition(f64),

    #[error("singular system: smallest singular value {sigma_min:.3e} below {threshold:.3e}")]
    SingularSystem { sigma_min: f64, threshold: f64 },

    #[error("sparse solver failed: {0}")]
    Solver(String),

    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
