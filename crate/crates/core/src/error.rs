use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("exponent at position {position} must be an integer")]
    NonIntegerExponent { position: usize },

    /// Evaluation left the map's domain of definition (division by zero).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation produced a non-finite value.
    #[error("overflow: evaluation produced a non-finite value at x = {x}")]
    Overflow { x: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix dimension {dim} exceeds the cap of {max}")]
    DimensionCap { dim: usize, max: usize },

    #[error("gain coefficients sum to {sum}, expected 1")]
    GainSum { sum: f64 },

    #[error("points do not form an orbit: |f(x[{index}]) - x[next]| = {residual:e}")]
    NotAnOrbit { index: usize, residual: f64 },

    #[error("the zero polynomial is not allowed here")]
    ZeroPolynomial,

    #[error("no zero of the imaginary part found on the theta grid")]
    NoBoundaryCrossing,
}

impl Error {
    /// Errors produced by user input rather than by the mathematics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownIdentifier { .. }
                | Error::NonIntegerExponent { .. }
                | Error::InvalidArgument(_)
        )
    }
}
