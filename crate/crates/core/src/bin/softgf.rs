use std::process::ExitCode;

fn main() -> ExitCode {
    soft_gframe::cli::main_from(std::env::args_os())
}
