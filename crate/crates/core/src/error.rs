use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("degenerate stationary law: {0}")]
    DegenerateLaw(String),
    #[error("integrability error: {0}")]
    Integrability(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
