use std::process::ExitCode;

use catmap_cli::config::Cli;
use catmap_cli::EXIT_CONFIG;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match catmap_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catmap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
