use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(batchprop_cli::run(std::env::args_os()))
}
