use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fockpath::{Exit, VERSION};

#[derive(Parser)]
#[command(
    name = "fockpath",
    about = "Time-slicing and quantization studies on truncated Fock spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Parse a config and check that it can run, without computing.
    Validate { config: PathBuf },
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { Exit::Usage.code() } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let exit = match cli.command {
        Command::Run { config } => fockpath::run(&config),
        Command::Validate { config } => fockpath::validate(&config),
        Command::Version => {
            println!("{VERSION}");
            Exit::Pass
        }
    };
    ExitCode::from(exit.code() as u8)
}
