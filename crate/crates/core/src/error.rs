use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate frequency {freq:e} rad/s in effective-Hamiltonian derivation")]
    DegenerateFrequency { freq: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("integrator health check failed at t = {t:e} s: {reason} (reduce dt)")]
    IntegratorHealth { t: f64, reason: String },

    #[error("quadrature not converged: |F(N) − F(2N)| = {delta:e} at N = {grid_n}")]
    QuadratureResolution { grid_n: usize, delta: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
