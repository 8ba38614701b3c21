use std::process::ExitCode;

use clap::Parser;
use hems_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match hems_cli::run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hems: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
