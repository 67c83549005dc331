//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by the
//! kind of failure so callers (notably the CLI) can map them onto coarse
//! categories: bad arguments, bad data, or I/O.

/// Errors produced by catalog loading, manifest parsing, dataset handling,
/// model fitting, and serialization.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A catalog line did not match the expected tab-separated record shape.
    #[error("catalog parse error at line {line}: {msg}")]
    CatalogParse { line: usize, msg: String },

    /// The catalog parsed but violated an invariant (duplicate name, ...).
    #[error("invalid catalog: {0}")]
    CatalogInvalid(String),

    /// Malformed text XML.
    #[error("xml parse error: {0}")]
    Xml(String),

    /// XML parsed but the expected document structure is missing.
    #[error("manifest structure error: {0}")]
    Structure(String),

    /// Malformed binary AXML; `offset` is the byte position of the problem.
    #[error("axml format error at byte {offset}: {msg}")]
    Axml { offset: usize, msg: String },

    /// Malformed ZIP container.
    #[error("zip container error: {0}")]
    Container(String),

    /// A named entry or file was not found.
    #[error("not found: {0}")]
    NotFound(String),

    /// Input uses a feature outside the supported subset (e.g. compression
    /// methods other than stored/deflate).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An argument violated a precondition (range, emptiness, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Matrix/model width or length mismatch.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A CSV file does not follow the matrix or labels schema.
    #[error("csv schema error: {0}")]
    Schema(String),

    /// Training data cannot support the requested fit (e.g. a single-class
    /// training set for a gradient-trained model).
    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    /// Pearson correlation was requested for a constant column.
    #[error("correlation undefined for constant column {0:?}")]
    UndefinedCorrelation(String),

    /// A serialized model file is malformed or has the wrong version/kind.
    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Error {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Schema(format!("csv error: {other:?}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
