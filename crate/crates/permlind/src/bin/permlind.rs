use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(permlind::frontend::cli::run_cli(std::env::args()) as u8)
}
