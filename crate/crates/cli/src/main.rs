use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = rsgan_cli::Cli::parse();
    match rsgan_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(rsgan_cli::exit_code(&err) as u8)
        }
    }
}
