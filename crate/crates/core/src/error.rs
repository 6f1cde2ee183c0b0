use thiserror::Error;

/// Errors raised by the library.
///
/// Structural errors concern malformed algebraic input (a group table that
/// is not a group, a matrix that is not invertible); validation errors
/// concern well-formed data that violates a modeling constraint.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("not in the span of induced trivial characters")]
    NotInSpan,

    #[error("Frobenius incompatible with inertia")]
    FrobeniusIncompatible,

    #[error("not a constructible torus: {0}")]
    NotConstructible(String),

    #[error("ramification filtration required at wild place {0}")]
    FiltrationRequired(String),

    #[error("virtual order: the decomposition yields the non-integral order {0}")]
    VirtualOrder(String),

    #[error("non-polynomial local factor: exponents {0} do not clear at this place")]
    NonPolynomialFactor(String),

    #[error("oracle incomplete: {0}")]
    OracleIncomplete(String),

    #[error("unknown field {label:?}; available fixtures: {available}")]
    UnknownField { label: String, available: String },

    #[error("field {0:?} is offline and uncached")]
    OfflineUncached(String),

    #[error("record schema mismatch ({schema}): {detail}")]
    Schema { schema: String, detail: String },

    #[error("non-primitive character: {0}")]
    NonPrimitive(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
