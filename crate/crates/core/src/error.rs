use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate axis name `{0}`")]
    DuplicateAxis(String),
    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("product alphabet has {0} entries, limit is {limit}", limit = crate::info_theory::MAX_ENTRIES)]
    TooLarge(usize),
    #[error("negative information {0:e} beyond tolerance")]
    NegativeInformation(f64),
    #[error("region is unbounded")]
    Unbounded,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid frontier: {0}")]
    InvalidFrontier(String),
    #[error("singular covariance: {0}")]
    SingularCovariance(String),
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
