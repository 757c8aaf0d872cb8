use std::process::ExitCode;

use clap::Parser;
use lancer_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match lancer_cli::init_workers().and_then(|()| lancer_cli::run(cli)) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
