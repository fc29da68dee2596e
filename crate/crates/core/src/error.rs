use std::path::PathBuf;

/// Errors produced by model construction, indexing, retrieval and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("target id {target} out of range (num_targets = {num_targets})")]
    TargetOutOfRange { target: u32, num_targets: usize },

    #[error("k must be at least 1")]
    InvalidK,

    #[error("budget must be at least 1")]
    InvalidBudget,

    #[error("non-finite value at {context}")]
    NonFinite { context: String },

    #[error("sparse storage requires strictly positive values ({context})")]
    SparseValue { context: String },

    #[error("sparse dim indices must be strictly increasing and < num_dims ({context})")]
    SparseDims { context: String },

    #[error("cannot normalize all-zero vector: {what}")]
    ZeroVector { what: String },

    #[error("Fagin's algorithm requires a dense index")]
    FaginSparseIndex,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic bytes, not an index file")]
    BadMagic { path: PathBuf },

    #[error("{path}: unsupported index version {version}")]
    BadVersion { path: PathBuf, version: u16 },

    #[error("{path}: file truncated")]
    Truncated { path: PathBuf },

    #[error("{path}: checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    ChecksumMismatch {
        path: PathBuf,
        stored: u64,
        computed: u64,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate entry ({row}, {col})")]
    DuplicateEntry {
        path: PathBuf,
        line: usize,
        row: u32,
        col: u32,
    },

    #[error("{path}:{line}: index ({row}, {col}) out of range for {num_rows}x{num_cols} matrix")]
    IndexOutOfRange {
        path: PathBuf,
        line: usize,
        row: u32,
        col: u32,
        num_rows: u32,
        num_cols: u32,
    },

    #[error("rank {rank} exceeds min(rows, cols) = {limit}")]
    RankTooLarge { rank: usize, limit: usize },

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
