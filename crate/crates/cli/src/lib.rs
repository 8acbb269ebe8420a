//! Subcommands of the `frisson` binary, usable in-process.

pub mod commands;
pub mod config;
mod error;
pub mod svg;

use std::path::{Path, PathBuf};

pub use commands::Session;
pub use config::{SessionConfig, SEED_ENV};
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SynthFrames,
    Detect,
    Stream,
    Receive,
    SynthEeg,
    Analyze,
}

/// Builds the session from `--config`, the seed override and `--out`.
pub fn session(config: &Path, out: Option<PathBuf>, seed: Option<&str>) -> Result<Session, CliError> {
    let mut cfg = SessionConfig::load(config)?;
    cfg.apply_seed_override(seed)?;
    cfg.validate()?;
    Ok(Session::new(cfg, out.unwrap_or_else(|| PathBuf::from("."))))
}

/// Runs one subcommand and records the effective config next to its outputs.
/// `address` overrides the configured connect/listen address.
pub fn run(command: Command, session: &Session, address: Option<&str>) -> Result<(), CliError> {
    std::fs::create_dir_all(&session.out).map_err(|e| CliError::Input(format!("{}: {e}", session.out.display())))?;
    session.write_effective_config()?;
    let stream = &session.config.stream;
    match command {
        Command::SynthFrames => commands::synth_frames(session).map(drop),
        Command::Detect => commands::detect(session).map(drop),
        Command::Stream => commands::stream(session, address.unwrap_or(&stream.connect)).map(drop),
        Command::Receive => commands::receive(session, address.unwrap_or(&stream.listen)).map(drop),
        Command::SynthEeg => commands::synth_eeg(session).map(drop),
        Command::Analyze => commands::analyze(session).map(drop),
    }
}
