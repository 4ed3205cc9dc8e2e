use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid keyword rules: {0}")]
    InvalidRules(String),

    #[error("unlabeled records present: {}", summarize(.0))]
    Unlabeled(Vec<String>),

    #[error("only one class present: {0}")]
    SingleClass(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in parameter tensor {tensor}")]
    NonFinite { tensor: String },

    #[error("unsupported format_version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("corrupt payload: {0}")]
    Corrupt(String),

    #[error("vocabulary mismatch: {0} vs {1}")]
    VocabularyMismatch(String, String),
}

/// First few names and a count, so huge lists stay readable.
fn summarize(names: &[String]) -> String {
    const SHOWN: usize = 5;
    let head = names
        .iter()
        .take(SHOWN)
        .cloned()
        .collect::<Vec<_>>()
        .join(", ");
    if names.len() > SHOWN {
        format!("{head}, ... ({} in total)", names.len())
    } else {
        head
    }
}

impl Error {
    /// True for failures that come from numerics rather than from data.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}
