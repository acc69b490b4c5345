use thiserror::Error;

/// Numerical failures raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("critical point at z = {z}: |f'| = {derivative:e} is below the threshold")]
    CriticalPoint { z: f64, derivative: f64 },
    #[error("no real root: discriminant {discriminant:e} at x = {x}")]
    NoRealRoot { x: f64, discriminant: f64 },
    #[error("invalid Möbius map: determinant {0:e}")]
    DegenerateMobius(f64),
    #[error("pole of Möbius map at w = {0}")]
    Pole(f64),
    #[error("range error: {0}")]
    Range(String),
    #[error("step size underflow at x = {x} (h = {step:e})")]
    StepSizeUnderflow { x: f64, step: f64 },
    #[error("blow-up at x = {x}: |state| exceeded {limit:e}")]
    BlowUp { x: f64, limit: f64 },
    #[error("amplitude collapse at x = {x}: r = {r:e} fell below the floor {floor:e}")]
    AmplitudeCollapse { x: f64, r: f64, floor: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
    #[error("grid too small: {points} points, need at least {required}")]
    GridTooSmall { points: usize, required: usize },
    #[error("grid is not uniform and resampling is disabled")]
    NonUniform,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("x = {x} outside the covered interval [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("f({x}) = {image} escapes the seed domain ({lo}, {hi})")]
    DomainEscape { x: f64, image: f64, lo: f64, hi: f64 },
    #[error("non-positive Jacobian f'({x}) = {jacobian:e}")]
    NegativeJacobian { x: f64, jacobian: f64 },
    #[error("closed-form constraint b·v⁶ + c² = 0 violated (value {0:e})")]
    ConstraintViolated(f64),
    #[error("quadrature failed to reach tolerance on [{a}, {b}] (estimate {error:e})")]
    QuadratureFailure { a: f64, b: f64, error: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("orbit element {index}: {source}")]
    Orbit { index: usize, source: Box<Error> },
}

impl Error {
    /// Variant name, for reports and diagnostics. Orbit errors report the
    /// kind of the underlying failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::NonFinite { .. } => "NonFinite",
            Error::CriticalPoint { .. } => "CriticalPoint",
            Error::NoRealRoot { .. } => "NoRealRoot",
            Error::DegenerateMobius(_) => "DegenerateMobius",
            Error::Pole(_) => "Pole",
            Error::Range(_) => "RangeError",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::BlowUp { .. } => "BlowUp",
            Error::AmplitudeCollapse { .. } => "AmplitudeCollapse",
            Error::TooManySteps(_) => "TooManySteps",
            Error::GridTooSmall { .. } => "GridTooSmall",
            Error::NonUniform => "NonUniform",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DomainEscape { .. } => "DomainEscape",
            Error::NegativeJacobian { .. } => "NegativeJacobian",
            Error::ConstraintViolated(_) => "ConstraintViolated",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Orbit { source, .. } => source.kind(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
