use thiserror::Error;

/// Errors raised by kernel loading, path/tree construction, samplers and the
/// combinatorial encoders.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed kernel file: {0}")]
    Syntax(String),

    #[error("kernel must have at least one vertex")]
    Empty,

    #[error("row {row} has {len} entries, expected {expected}")]
    RowLength { row: usize, len: usize, expected: usize },

    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),

    #[error("entry ({row},{col}) is not a valid number: {text:?}")]
    BadEntry { row: usize, col: usize, text: String },

    #[error("entry ({row},{col}) is negative")]
    NegativeEntry { row: usize, col: usize },

    #[error("row {row} ({label:?}) sums to {sum}, expected 1")]
    RowSum { row: usize, label: String, sum: String },

    #[error(
        "support asymmetry at ({row},{col}): entry {row_label:?}->{col_label:?} is zero but its transpose is positive"
    )]
    AsymmetricSupport {
        row: usize,
        col: usize,
        row_label: String,
        col_label: String,
    },

    #[error("support graph is disconnected: vertex {col} ({label:?}) unreachable from vertex 0")]
    Disconnected { col: usize, label: String },

    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),

    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),

    #[error("path is empty")]
    EmptyPath,

    #[error("path visits {visited} of {n} vertices, a covering path is required")]
    NotCovering { visited: usize, n: usize },

    #[error("step {from}->{to} is outside the kernel support")]
    Unsupported { from: usize, to: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("step budget of {0} exhausted before the walk stopped")]
    StepBudget(u64),

    #[error("vertex count {n} exceeds the enumeration guard {max}")]
    TooLarge { n: usize, max: usize },

    #[error("edge budget {0} exceeds the enumeration guard of 64")]
    EdgeBudget(usize),

    #[error("singular linear system")]
    Singular,

    #[error("heap collection is not the image of a path: {0}")]
    NotAPathImage(String),

    #[error("heap of vertex {vertex} is not a prefix of the collection")]
    NotAPrefix { vertex: usize },

    #[error("heap collection is not balanced at vertex {vertex} (out {out}, in {inn})")]
    Unbalanced { vertex: usize, out: usize, inn: usize },

    #[error("heap of vertex {0} is empty")]
    EmptyHeap(usize),

    #[error("vertex {0} is an internal node of the tree, not a leaf")]
    NotALeaf(usize),

    #[error("invalid golf configuration: {0}")]
    GolfConfig(String),

    #[error("heap collection is outside the decomposable family: {0}")]
    PassportMismatch(String),

    #[error("cycles of the trivial part are not disjoint or touch the excluded vertex")]
    NotTrivial,

    #[error("the empty pair is the fixed point of the involution")]
    EmptyPair,

    #[error("cannot compare: {0}")]
    Compare(String),
}

pub type Result<T> = std::result::Result<T, Error>;
