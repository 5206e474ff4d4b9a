use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rfl_core::Error;

mod commands;
mod config;

use config::{CommandName, Flags, RunConfig, SCHEMA};

#[derive(Parser, Debug)]
#[command(name = "rfl", version, about = "Kernel projections and tanh networks for functionals on RKHS unit balls")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Power-function decay over a list of grid sizes, with a fitted slope
    Rates(Flags),
    /// Smallest Gram eigenvalues against the m^{-gamma} bounds
    Eigen(Flags),
    /// Projection of random unit-ball functions onto the grid
    Project(Flags),
    /// Train networks of one or more widths on functional values
    Train(Flags),
    /// Error decomposition for the generalized FLM map over grid sizes
    Flm(Flags),
    /// Grid size, widths and error bound prescribed for a given M
    Meta(Flags),
    /// Print the JSON schema accepted by --config
    Schema,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_) | Error::Unsupported(_) | Error::Json(_) => 2,
        e if e.is_numerical() => 3,
        _ => 1,
    }
}

fn effective(command: CommandName, flags: &Flags) -> Result<RunConfig, Error> {
    let base = match &flags.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    base.merge(command, flags)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, flags) = match cli.command {
        Cmd::Schema => {
            print!("{SCHEMA}");
            return ExitCode::SUCCESS;
        }
        Cmd::Rates(f) => (CommandName::Rates, f),
        Cmd::Eigen(f) => (CommandName::Eigen, f),
        Cmd::Project(f) => (CommandName::Project, f),
        Cmd::Train(f) => (CommandName::Train, f),
        Cmd::Flm(f) => (CommandName::Flm, f),
        Cmd::Meta(f) => (CommandName::Meta, f),
    };
    let result = effective(command, &flags).and_then(|cfg| {
        let threads = cfg.threads.unwrap_or(1).max(1);
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("thread pool: {e}");
        }
        commands::run(&cfg)
    });
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
