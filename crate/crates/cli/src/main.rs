use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(robin_cli::run(std::env::args_os()) as u8)
}
