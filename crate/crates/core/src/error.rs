use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("mismatched endpoints: {0}")]
    MismatchedEndpoints(String),
    #[error("hom enumeration exceeded the limit of {limit} arrows")]
    SizeLimitExceeded { limit: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("amalgamation search failed: {0}")]
    AmalgamationSearchFailed(String),
    #[error("extension search failed at stage {stage}")]
    ExtensionSearchFailed { stage: usize },
    #[error("bond ({0}, {1}) is not injective")]
    NonInjectiveBond(usize, usize),
    #[error("no pushout found up to bound {0}")]
    NoPushout(usize),
    #[error("unique mediator missing: {0}")]
    UniqueMediatorMissing(String),
    #[error("no coherent retractions; failing triple ({0}, {1}, {2})")]
    NoCoherentRetractions(usize, usize, usize),
    #[error("height exceeded: {0}")]
    HeightExceeded(String),
    #[error("insufficient headroom: {0}")]
    InsufficientHeadroom(String),
    #[error("node cap {cap} exceeded (needs {needed})")]
    CapExceeded { cap: usize, needed: usize },
    #[error("incomplete enumeration of maximal nodes: {0}")]
    IncompleteEnumeration(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("map is not isometric: {0}")]
    NotIsometric(String),
    #[error("map is not left invertible: {0}")]
    NotLeftInvertible(String),
    #[error("cocone mismatch: {0}")]
    CoconeMismatch(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}
