use std::process::ExitCode;

fn main() -> ExitCode {
    linkclust::cli::main_with_args(std::env::args_os())
}
