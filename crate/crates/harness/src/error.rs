use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("run aborted at t = {time}: {msg}")]
    Aborted { time: f64, msg: String },
    #[error(transparent)]
    Core(#[from] captension_core::Error),
    #[error("fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),
    #[error("fit needs positive values, got {0}")]
    NonPositive(f64),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigLine { .. } | Self::Config(_) | Self::UnknownModel(_) => 3,
            Self::Aborted { .. } | Self::Core(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
