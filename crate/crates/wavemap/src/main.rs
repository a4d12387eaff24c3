use std::process::ExitCode;

fn main() -> ExitCode {
    wavemap::cli::main()
}
