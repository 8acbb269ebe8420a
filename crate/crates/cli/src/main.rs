use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frisson_cli::{run, session, Command, SEED_ENV};

#[derive(Parser)]
#[command(
    name = "frisson",
    version,
    about = "Goosebump detection, live markers and event-locked EEG analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Session config (JSON); missing fields take defaults.
    #[arg(long)]
    config: PathBuf,
    /// Directory that relative config paths resolve against.
    #[arg(long)]
    out: Option<PathBuf>,
    /// host:port; overrides stream.connect (stream) or stream.listen (receive).
    #[arg(long)]
    connect: Option<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Write a synthetic skin-frame sequence and its ground truth.
    SynthFrames(Common),
    /// Detect goosebump events in a frame directory.
    Detect(Common),
    /// Replay frames live and send markers to a receiver.
    Stream(Common),
    /// Accept one marker connection and log it with arrival times.
    Receive(Common),
    /// Write synthetic EEG with bursts during the ground-truth events.
    SynthEeg(Common),
    /// Event-locked EEG analysis and report.
    Analyze(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::SynthFrames(a) => (Command::SynthFrames, a),
        Sub::Detect(a) => (Command::Detect, a),
        Sub::Stream(a) => (Command::Stream, a),
        Sub::Receive(a) => (Command::Receive, a),
        Sub::SynthEeg(a) => (Command::SynthEeg, a),
        Sub::Analyze(a) => (Command::Analyze, a),
    };
    let seed = std::env::var(SEED_ENV).ok();
    let result =
        session(&args.config, args.out, seed.as_deref()).and_then(|s| run(command, &s, args.connect.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("frisson: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
