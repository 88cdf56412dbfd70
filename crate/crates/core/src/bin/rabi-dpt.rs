use std::process::ExitCode;

use clap::Parser;
use rabi_dpt::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rabi-dpt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
