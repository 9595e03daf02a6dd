use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid generator spec: need 2 <= k <= n, got n = {n}, k = {k}")]
    InvalidGenSpec { n: usize, k: usize },

    #[error("cardinality must be at least 2, got {0}")]
    InvalidCardinality(u64),

    #[error("timings must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: line {line}: {message}", path.display())]
    Csv { path: PathBuf, line: u64, message: String },

    #[error("no join: no (n, k) point was measured by both cafs and {baseline}")]
    NoJoin { baseline: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
