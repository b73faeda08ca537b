use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("matrix is not a metric: {0}")]
    NotAMetric(String),

    /// 1-based indices with `d(i, j) > d(i, k) + d(k, j)`.
    #[error("triangle inequality violated: d({i},{j}) > d({i},{k}) + d({k},{j})")]
    TriangleViolation { i: usize, j: usize, k: usize },

    #[error("wrong method: {0}")]
    WrongMethod(String),

    /// A size cap was exceeded. `partial` carries whatever counts were
    /// completed before giving up (e.g. an f-vector from the top dimension down).
    #[error("capacity exceeded: {message}")]
    Capacity { message: String, partial: Vec<u64> },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn capacity(message: impl Into<String>) -> Self {
        Error::Capacity {
            message: message.into(),
            partial: Vec::new(),
        }
    }
}
