use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected degree {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("ill-conditioned divisor {value:e} at m' = {m_prime}")]
    IllConditioned { m_prime: i64, value: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("degree {n} exceeds the dense-matrix cap of {cap}")]
    MemoryBudget { n: usize, cap: usize },

    #[error("could not allocate storage for degree {n}")]
    Allocation { n: usize },

    #[error("bandwidth mismatch: expansion has p = {expansion}, provider covers {provider}")]
    BandwidthMismatch { expansion: usize, provider: usize },
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&beta) {
        return Err(Error::Domain(format!(
            "beta = {beta} lies outside [0, pi]; reduce it with the rotation symmetries first"
        )));
    }
    Ok(())
}
