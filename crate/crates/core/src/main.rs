use std::process::ExitCode;

fn main() -> ExitCode {
    freqlens::cli::main_with_args(std::env::args_os())
}
