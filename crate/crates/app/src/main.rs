use std::process::ExitCode;

fn main() -> ExitCode {
    qgen::cli::run(std::env::args_os())
}
