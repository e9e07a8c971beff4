use thiserror::Error;

/// Crate-wide error type.
///
/// All arithmetic is checked: any overflow surfaces as [`Error::Overflow`]
/// instead of wrapping silently.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("cannot enumerate an infinite group")]
    InfiniteEnumeration,

    #[error("no graded extension: {0}")]
    NoGradedExtension(String),

    #[error("invalid x choice: {0}")]
    InvalidChoice(String),

    #[error("wrong variant: {0}")]
    WrongVariant(String),

    #[error("odd case inapplicable: {0}")]
    OddCaseInapplicable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Signals an internal inconsistency that the design rules out; seeing
    /// this error means an implementation bug, never bad input.
    #[error("invariant violation (implementation bug): {0}")]
    InvariantViolation(String),

    #[error("group order {order} exceeds the oracle bound {bound}")]
    OrderBound { order: u128, bound: u128 },

    #[error("invalid group spec: {0}")]
    Spec(String),

    #[error("invalid element: {0}")]
    Element(String),
}

pub type Result<T> = std::result::Result<T, Error>;
