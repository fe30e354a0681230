use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain of the operation it was passed to.
    #[error("input domain: {0}")]
    InputDomain(String),

    #[error("configuration: {0}")]
    Config(String),

    /// A feature falls outside the normalization range of a network.
    #[error("feature `{feature}` = {value} outside normalization range [{lo}, {hi}]")]
    Range {
        feature: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("structural: {0}")]
    Structural(String),

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("encoding: {0}")]
    Encoding(String),

    #[error("emission: {0}")]
    Emission(String),

    #[error("case: {0}")]
    Case(String),

    #[error("coupling: feature `{feature}`: {message}")]
    Coupling { feature: String, message: String },

    #[error("extraction: {0}")]
    Extraction(String),

    /// The solver executable or runtime is unavailable.
    #[error("environment: {0}")]
    Environment(String),

    #[error("solver adapter: {message}\n--- captured output ---\n{output}")]
    Adapter { message: String, output: String },

    #[error("consistency: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn from_json(err: serde_json::Error, what: &str) -> Self {
        Error::Parse {
            line: err.line(),
            field: what.to_string(),
            message: err.to_string(),
        }
    }
}
