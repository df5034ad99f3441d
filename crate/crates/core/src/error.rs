use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown topic id `{0}`")]
    UnknownTopic(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("taxonomy node `{id}` has tree number `{tree_number}` whose parent `{parent}` does not exist")]
    DanglingTreeNumber {
        id: String,
        tree_number: String,
        parent: String,
    },

    #[error("taxonomy node `{id}` sits at depth {depth}, beyond the supported maximum of {max}")]
    TooDeep { id: String, depth: usize, max: usize },

    #[error("depth {0} outside 1..=13")]
    DepthOutOfRange(usize),

    #[error("embedding for `{id}` has {found} entries, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value for `{0}`")]
    NonFinite(String),

    #[error("embedding references unknown document `{0}`")]
    UnknownDocument(String),

    #[error("year range mismatch: {0}")]
    RangeMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("point ({x}, {y}) lies outside the grid bounds")]
    OutOfBounds { x: f64, y: f64 },

    #[error("no quartile pool for year {year}, ancestor `{ancestor}`")]
    AbsentPool { year: i32, ancestor: String },

    #[error("window {window} too large for a series of length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Degenerate(_) | Error::SeriesTooShort(_))
    }
}
