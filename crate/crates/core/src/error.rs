//! Error types for every stage of the toolkit.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Top-level error, one variant per subsystem.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Nb(#[from] NbError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    ModelIo(#[from] ModelIoError),
}

impl Error {
    /// True for failures rooted in input data rather than in training math.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Data(_) | Error::Preprocess(_) | Error::ModelIo(_) => true,
            Error::Pipeline(PipelineError::Stage { source, .. }) => source.is_data_error(),
            Error::Eval(EvalError::Fold { source, .. }) => source.is_data_error(),
            _ => false,
        }
    }
}

/// Ingestion and splitting failures.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("empty input: no data rows")]
    EmptyInput,
    #[error("line {line}: expected {expected} columns, found {found}")]
    MalformedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: column {column:?} is not a number: {value:?}")]
    BadNumber {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}: column {column:?} is {value} which is not finite")]
    NonFiniteNumber {
        line: u64,
        column: String,
        value: f64,
    },
    #[error("line {line}: missing or empty label column")]
    MissingLabel { line: u64 },
    #[error("line {line}: label must be 0 or 1, found {value:?}")]
    BadLabel { line: u64, value: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("train fraction must be strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("cannot stratify: class {class} has {count} records, need at least 2")]
    CannotStratify { class: u8, count: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("record dump: {0}")]
    Dump(String),
}

/// Feature-selection and normalization failures.
#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("unknown feature {name:?}; known numeric features: {known}")]
    UnknownFeature { name: String, known: String },
    #[error("feature matrix has no rows")]
    EmptyMatrix,
    #[error("column mismatch: normalizer fitted on {fitted:?}, applied to {applied:?}")]
    ColumnMismatch { fitted: String, applied: String },
    #[error("row has {found} values, normalizer expects {expected}")]
    WidthMismatch { expected: usize, found: usize },
}

/// Naive Bayes fitting and scoring failures.
#[derive(Debug, Error)]
pub enum NbError {
    #[error("need both classes present to fit, found only class {0}")]
    SingleClass(u8),
    #[error("class {class} has {count} rows, need at least 2")]
    TooFewRows { class: u8, count: usize },
    #[error("feature vector has {found} values, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("value {value} at row {row}, feature {col} is negative; translate inputs to be non-negative first")]
    NegativeValue { row: usize, col: usize, value: f64 },
    #[error("alpha = 0 with an all-or-nothing feature count produces log(0); use alpha > 0")]
    ZeroCountNeedsSmoothing,
    #[error("alpha must be {requirement}, got {got}")]
    BadAlpha { requirement: &'static str, got: f64 },
}

/// Network construction and training failures.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid layer spec: {0}")]
    BadSpec(String),
    #[error("input width {found} does not match layer width {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("spec {0:?} is not a symmetric odd-length autoencoder spec")]
    AsymmetricSpec(Vec<usize>),
    #[error("non-finite loss {loss} at epoch {epoch}; training aborted")]
    NonFiniteLoss { epoch: usize, loss: f64 },
    #[error("classifier training needs both classes present")]
    SingleClass,
    #[error("cross-entropy loss requires a sigmoid output layer")]
    LossActivationMismatch,
}

/// Staged pipeline failures, annotated with the stage that failed.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl PipelineError {
    pub fn stage(stage: &'static str, source: impl Into<Error>) -> Self {
        PipelineError::Stage {
            stage,
            source: Box::new(source.into()),
        }
    }
}

/// Evaluation harness failures.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("labels and predictions must be binary, found {0}")]
    NotBinary(u8),
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Model file encoding and decoding failures, one kind per defect.
#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("bad magic: not a model file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown model kind byte 0x{0:02x}")]
    UnknownKind(u8),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("truncated: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("{trailing} trailing bytes after payload")]
    TrailingBytes { trailing: usize },
    #[error("payload corrupt: {0}")]
    Corrupt(String),
    #[error("refusing to serialize non-finite parameter {value} in {section}")]
    NonFinite { section: &'static str, value: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
