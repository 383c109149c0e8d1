use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid sample space: {0}")]
    InvalidSpace(String),
    /// The space is well-formed but has more cells than the configured cap.
    #[error("invalid sample space: {cells} cells exceeds cell cap {cap}")]
    CellCapExceeded { cells: u128, cap: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("support set is empty")]
    EmptySupport,
    #[error("duplicate point {0:?}")]
    DuplicatePoint(Vec<u32>),
    #[error("invalid point {point:?}: {reason}")]
    InvalidPoint { point: Vec<u32>, reason: String },
    #[error("grid format requires exactly 2 informants, got {0}")]
    UnsupportedFormat(usize),
    #[error("informant index {index} out of range for {num_informants} informants")]
    IndexOutOfRange { index: usize, num_informants: usize },
    #[error("symbol {symbol} out of range for alphabet size {alphabet_size}")]
    InvalidSymbol { symbol: u32, alphabet_size: u32 },
    #[error("enumeration of {requested} sets exceeds guard {guard}")]
    EnumerationTooLarge { requested: u128, guard: u128 },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("memo table exceeded {limit} states")]
    StateSpaceTooLarge { limit: usize },
    #[error("point {0:?} is not in the support set")]
    PointNotInSupport(Vec<u32>),
}

impl Error {
    /// True for refusals caused by a resource guard rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::EnumerationTooLarge { .. }
                | Error::StateSpaceTooLarge { .. }
                | Error::CellCapExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
