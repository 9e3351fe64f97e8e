use std::process::ExitCode;

fn main() -> ExitCode {
    delm::cli::run(std::env::args_os())
}
