use thiserror::Error;

/// Errors raised by model construction, inference and region-graph manipulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: factor {factor} has {actual} table entries, scope requires {expected}")]
    SizeMismatch {
        factor: usize,
        expected: usize,
        actual: usize,
    },

    #[error("factor {factor} has an invalid table entry {value}")]
    InvalidEntry { factor: usize, value: f64 },

    #[error("factor {0} has an empty scope")]
    EmptyScope(usize),

    #[error("factor {0} has a table with no positive entry")]
    AllZeroTable(usize),

    #[error("factor {factor} references unknown or repeated variable {var}")]
    BadScope { factor: usize, var: usize },

    #[error("variable {0} is not mentioned by any factor")]
    IsolatedVariable(usize),

    #[error("variable {var} has cardinality {card}; at least 2 states are required")]
    BadCardinality { var: usize, card: usize },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state space too large: {0} joint states")]
    StateSpaceTooLarge(f64),

    #[error("induced width {width} exceeds cap {cap}")]
    WidthExceeded { width: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cycle detected in region graph")]
    CycleDetected,

    #[error("unknown region {0}")]
    UnknownRegion(usize),

    #[error("region {0} duplicates an existing region")]
    DuplicateRegion(usize),

    #[error("edge {parent} -> {child} is not a subregion relation")]
    NotSubregion { parent: usize, child: usize },

    #[error("region graph is not extendable: {0}")]
    NotExtendable(String),

    #[error("factor {0} is not placed in any region of the graph")]
    UnplacedFactor(usize),

    #[error("invalid region graph: {0}")]
    InvalidRegionGraph(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("transform precondition failed: {0}")]
    Precondition(String),

    #[error("empty candidate pool")]
    EmptyPool,

    #[error("exact oracle infeasible: {0}")]
    OracleInfeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
