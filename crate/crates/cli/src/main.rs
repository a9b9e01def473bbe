use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(dp_cli::main_with(std::env::args().collect()))
}
