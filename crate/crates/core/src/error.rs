use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric routine was called outside its domain.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The SNR threshold cannot be met even directly below the AP.
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config error in [{section}] key `{key}`: {detail}")]
    ConfigKey {
        section: String,
        key: String,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}
