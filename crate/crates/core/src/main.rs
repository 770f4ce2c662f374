use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = scgs_core::cli::configure_threads_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(scgs_core::cli::EXIT_USAGE as u8);
    }
    let code = scgs_core::cli::run(std::env::args_os(), &mut io::stdin(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
