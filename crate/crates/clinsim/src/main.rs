use std::process::ExitCode;

fn main() -> ExitCode {
    clinsim::cli::main()
}
