use thiserror::Error;

/// Errors raised by the engine. Every variant is a hard stop: nothing is
/// silently approximated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element is not a unit")]
    NotAUnit,
    #[error("precision exhausted: valuation {valuation} reaches budget {budget}")]
    PrecisionExhausted { valuation: usize, budget: usize },
    #[error("matrix is not idempotent modulo epsilon")]
    NotApproxIdempotent,
    #[error("residue field too small: {0}")]
    FieldTooSmall(String),
    #[error("summand does not match any catalog label: {0}")]
    UnidentifiedSummand(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("endomorphism ring is not local")]
    NotLocal,
    #[error("lattice carries no Heller basis tag")]
    MissingBasisTag,
    #[error("no valid phi found: {0}")]
    NoValidPhi(String),
    #[error("no tau-period within bound {0}")]
    PeriodNotFound(usize),
    #[error("quiver has loops")]
    HasLoops,
    #[error("group action not admissible: {0}")]
    NotAdmissible(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
