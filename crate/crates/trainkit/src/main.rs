use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(trainkit::cli::run(std::env::args_os()) as u8)
}
