use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ERMAKOV_LOG", "warn"))
        .format_timestamp(None)
        .init();
    ermakov_cli::run(ermakov_cli::Cli::parse())
}
