use std::process::ExitCode;

mod cli;
mod runner;
mod table;

fn main() -> ExitCode {
    cli::run()
}
