use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polyhedral pair: {0}")]
    InvalidPair(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0:?} lies outside X")]
    OutsideX(Vec<f64>),

    #[error("point does not lie in the referenced simplex (weight {0:e})")]
    NotInSimplex(f64),

    #[error("invalid lattice vertex: {0}")]
    InvalidVertex(String),

    #[error("kernel layer {layer} is below the birth layer {birth} of the vertex")]
    LayerBelowBirth { layer: u32, birth: u32 },

    #[error("basis index {0} is out of range")]
    IndexOutOfRange(u64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Wasserstein distance requires integer weights, found {0}")]
    NonIntegerWeight(f64),

    #[error("{what} has {size} points after expansion, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("diagrams live on different polyhedral pairs")]
    PairMismatch,

    #[error("functional is {value:e} at the A-point {point:?}")]
    NonzeroOnA { point: Vec<f64>, value: f64 },

    #[error("wrong basis kind: {0}")]
    WrongKind(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid barcode: {0}")]
    InvalidBarcode(String),

    #[error("lattice count overflowed")]
    CountOverflow,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
