use std::process::ExitCode;

use clap::Parser;
use qst::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qst: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
