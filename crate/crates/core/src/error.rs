use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    /// An evaluation point hit a pole of the expression being evaluated.
    #[error("pole: {0}")]
    Pole(String),

    #[error("series constant term is not invertible")]
    NotInvertible,

    #[error("factor {index} of infinite product violates valuation bound (found {found}, need >= {index})")]
    Valuation { index: usize, found: usize },

    #[error("w-degree {requested} exceeds degree cap {cap}")]
    DegreeCap { requested: usize, cap: usize },

    #[error("mismatched shapes: {0}")]
    Shape(String),

    #[error("rejection budget exhausted after {attempts} attempts")]
    Sampling { attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}
