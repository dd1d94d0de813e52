use std::process::ExitCode;

fn main() -> ExitCode {
    magus::cli::main()
}
