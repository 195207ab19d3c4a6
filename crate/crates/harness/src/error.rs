use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("latent file format error at byte offset {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("unsupported latent file version {found} (reader supports {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("report error: {0}")]
    Report(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Core(#[from] fmm_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(fmm_core::Error::InvalidConfig(_)) => 2,
            _ => 3,
        }
    }
}
