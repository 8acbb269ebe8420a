use thiserror::Error;

use frisson_core::eeg_analysis::EegError;
use frisson_core::frame_io::FrameError;
use frisson_core::live::LiveError;
use frisson_core::marker_sync::{ClockError, LogError};
use frisson_core::pilo_detect::DetectError;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Missing, unreadable or invalid input; also unwritable outputs.
    #[error("{0}")]
    Input(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("empty analysis: {0}")]
    EmptyAnalysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Transport(_) => 3,
            CliError::EmptyAnalysis(_) => 4,
        }
    }

    pub(crate) fn input(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{context}: {e}"))
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EegError> for CliError {
    fn from(e: EegError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LogError> for CliError {
    fn from(e: LogError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ClockError> for CliError {
    fn from(e: ClockError) -> Self {
        CliError::Input(format!("clock map: {e}"))
    }
}

impl From<LiveError> for CliError {
    fn from(e: LiveError) -> Self {
        match e {
            LiveError::Transport(io) => CliError::Transport(io.to_string()),
            LiveError::Detect(d) => d.into(),
            LiveError::LocalLog(io) => CliError::Input(format!("local marker log: {io}")),
        }
    }
}
