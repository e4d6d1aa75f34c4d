use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("drift matrix is not Hurwitz stable (max eigenvalue real part {max_real_part:e})")]
    UnstableDrift { max_real_part: f64 },

    #[error("Lyapunov system is singular")]
    SingularSystem,

    #[error("matrix is not positive definite")]
    NonPositiveInput,

    #[error("steering block is numerically singular (condition number {condition:e})")]
    SingularBlock { condition: f64 },

    #[error("negative discriminant {0:e} in the two-mode symplectic formula")]
    NegativeDiscriminant(f64),

    #[error("eigenvalues of iΩV do not pair up: {0:e} vs {1:e}")]
    UnpairedSpectrum(f64, f64),

    #[error("closed-form denominator vanishes ({0:e}); parameters sit on the stability boundary")]
    DegenerateDenominator(f64),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid mode selection: {0}")]
    InvalidModes(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown measure key `{0}`")]
    UnknownMeasure(String),

    #[error("measure never reaches zero along the scanned axis")]
    NoCrossing,

    #[error("measure is not monotone along the scanned axis (at {at})")]
    NonMonotone { at: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
