use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown backend \"{0}\" (expected gzip, bz2, lzma, zstd or identity)")]
    UnknownBackend(String),

    #[error("invalid level {level} for {backend}: legal range is {min}..={max}")]
    InvalidLevel {
        backend: &'static str,
        level: u32,
        min: u32,
        max: u32,
    },

    #[error("{backend} compression failed: {source}")]
    Compression {
        backend: &'static str,
        #[source]
        source: std::io::Error,
    },

    #[error("compression ratio undefined for empty payload")]
    EmptyPayload,

    #[error("NCD denominator is zero: both inputs have compressed length 0")]
    ZeroDenominator,

    #[error("distance matrix failed at cell ({row}, {col}): {source}")]
    MatrixCell {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("k must be in 1..={cols}, got {k}")]
    InvalidK { k: usize, cols: usize },

    #[error("class \"{0}\" has no training documents")]
    EmptyClass(String),

    #[error("class \"{class}\" has {available} documents, {requested} requested")]
    NotEnoughDocs {
        class: String,
        available: usize,
        requested: usize,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("test and train document lists must be non-empty")]
    EmptyDocumentList,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input lists have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },

    #[error("correlation undefined for constant input")]
    ConstantInput,

    #[error("target accuracy {0} not present among candidates")]
    TargetNotFound(f64),

    #[error("matrix file is not in NCDM format: {0}")]
    BadMatrixFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
