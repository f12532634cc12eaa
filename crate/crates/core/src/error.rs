use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem label `{0}` already present in layout")]
    LabelCollision(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("matrix is not Hermitian (max |m - m^dagger| = {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid measurement: {0}")]
    InvalidPovm(String),

    #[error("unknown state family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("layout is not bipartite: {0}")]
    NotBipartite(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("negative rate {rate} for {what}")]
    NegativeRate { what: String, rate: f64 },

    #[error("state file error: {0}")]
    Format(String),
}
