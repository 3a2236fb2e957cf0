use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian: max |A - A^H| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("function undefined on eigenvalue {eigenvalue}")]
    Domain { eigenvalue: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid factor selection: {0}")]
    InvalidFactors(String),

    #[error("outcome {label} suppressed: P = {probability:.3e} below floor")]
    SuppressedOutcome { label: f64, probability: f64 },

    #[error("sample initial state is not diagonal in the sample energy basis (off-block weight {offdiag:.3e})")]
    NonThermalSample { offdiag: f64 },

    #[error("reduced Gibbs operator is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("Sylvester denominator a_i + a_j = {value:.3e} is numerically singular")]
    SingularSylvester { value: f64 },

    #[error("identity `{identity}` violated: deviation {deviation:.3e} > tolerance {tolerance:.1e}")]
    IdentityViolation {
        identity: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
