use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// I/O failure, origin crossing, non-finite state, sampling failure.
    pub const RUNTIME: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NEWTON_DIVERGENCE: i32 = 3;
    pub const THRESHOLD: i32 = 4;
    pub const DIVISIBILITY: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("exact division failed: {0}")]
    Divisibility(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Runtime(_) | CliError::Io(_) => exit::RUNTIME,
            CliError::Divisibility(_) => exit::DIVISIBILITY,
        }
    }
}
