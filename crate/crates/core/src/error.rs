use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("relation cycle through elements {i} and {j}")]
    Cycle { i: usize, j: usize },
    #[error("element index {index} out of range for dimension {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("label {label:?} appears more than once")]
    DuplicateLabel { label: String },
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("poset file is not valid JSON: {0}")]
    Parse(String),
    #[error("operation requires a non-empty poset")]
    EmptyPoset,
    #[error("index 0 is not a unique maximum element")]
    NotRooted,
    #[error("dimension {d} exceeds enumeration cap {cap}")]
    CapExceeded { d: usize, cap: usize },
    #[error("vector length {found} does not match dimension {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("element {v} is not maximal")]
    NotMaximal { v: usize },
    #[error("orders do not partition the ground set")]
    NotAPartition,
    #[error("order {side} is not a linear extension of its induced subposet")]
    NotLinearExtension { side: char },
    #[error("filter at position {position} is not upward closed")]
    FilterNotUpwardClosed { position: usize },
    #[error("chain is not strictly increasing at position {position}")]
    ChainNotIncreasing { position: usize },
    #[error("chain does not start with the empty filter")]
    FirstFilterNotEmpty,
    #[error("minimal sets at positions {position} and {}  differ by {size} elements, expected 1", position + 1)]
    MinDiffNotSingleton { position: usize, size: usize },
    #[error("chains interfere: minimal sets share element {element}")]
    InterferingChains { element: usize },
    #[error("chain lengths sum to {found}, expected {expected}")]
    ChainLengthMismatch { expected: usize, found: usize },
    #[error("record {index} does not respect the partial order")]
    InvalidRecord { index: usize },
    #[error("counts violate monotonicity: count[{i}] > count[{j}] but element {i} precedes {j}")]
    NonMonotoneCounts { i: usize, j: usize },
    #[error("epsilon must be positive and finite, got {value}")]
    InvalidEpsilon { value: f64 },
    #[error("sensitivity must be positive and finite, got {value}")]
    InvalidSensitivity { value: f64 },
    #[error("category {category} undersampled: expected count {expected:.2} below 5")]
    Undersampled { category: usize, expected: f64 },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("exact arithmetic overflow in {0}")]
    ExactOverflow(&'static str),
    #[error("no bundled poset for sections specification {0:?}")]
    UnknownSections(String),
}

pub type Result<T> = std::result::Result<T, Error>;
