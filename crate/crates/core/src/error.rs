use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("negative sampling failed: {0}")]
    SamplingExhausted(String),
    #[error("clique enumeration exceeded cap of {0}")]
    CliqueCap(usize),
    #[error("model fit failed: {0}")]
    Fit(String),
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    NonFiniteLoss { epoch: usize },
    #[error("unknown dataset '{key}'; available: {available}")]
    UnknownDataset { key: String, available: String },
    #[error("config: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
