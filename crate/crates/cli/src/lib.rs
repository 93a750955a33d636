//! Command-line front end: configuration, scenario dispatch and CSV output.

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

pub use commands::{execute, Outcome};
pub use config::{Cli, CommandKind, FileConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Flags(#[from] clap::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] arrival_core::Error),
    #[error("{0} validation checks failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use arrival_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Domain(_) | E::UnknownPreset(_)) => EXIT_CONFIG,
            CliError::Core(_) | CliError::ChecksFailed(_) => EXIT_NUMERICAL,
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (cfg, cli) = match RunConfig::from_args(args) {
        Ok(parsed) => parsed,
        Err(ConfigError::Flags(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
        Err(e) => {
            eprintln!("arrival-lab: {e}");
            return EXIT_CONFIG;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cfg) {
        Ok(Outcome::Complete) => EXIT_OK,
        Ok(Outcome::Partial) => EXIT_PARTIAL,
        Err(e) => {
            eprintln!("arrival-lab: {e}");
            e.exit_code()
        }
    }
}
