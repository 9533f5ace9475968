use thiserror::Error;

/// Errors raised by the renewal/ARMA engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no roots of a constant")]
    ConstantPolynomial,
    #[error("root residual {residual:e} exceeds bound {bound:e}")]
    RootResidual { residual: f64, bound: f64 },
    #[error("no zero at z=1 (|p(1)| = {value:e})")]
    NoZeroAtOne { value: f64 },
    #[error("numerator lacks (1-z)(1-1/z) factor (|n(1)| = {value:e})")]
    MissingUnitPair { value: f64 },
    #[error("zero on unit circle: lifetime may be lattice or input invalid (|a| = {modulus})")]
    ZeroOnUnitCircle { modulus: f64 },
    #[error("not a valid symmetric spectral density (min on circle = {min:e})")]
    NotSpectralDensity { min: f64 },
    #[error("reciprocal root pairing failed (best |a*b - 1| = {mismatch:e})")]
    RootPairing { mismatch: f64 },
    #[error("invalid lifetime distribution: {0}")]
    InvalidSpec(String),
    #[error("lattice lifetime distribution (support gcd = {gcd})")]
    Lattice { gcd: u64 },
    #[error("singular evaluation point")]
    SingularEvaluation,
    #[error("factorization inconsistent with the closed-form constant (k = {k_constant_term}, variance route {k_theorem})")]
    KInconsistent {
        k_constant_term: f64,
        k_theorem: f64,
    },
    #[error("numerically non-causal (max reciprocal AR root modulus {rho})")]
    NonCausal { rho: f64 },
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
