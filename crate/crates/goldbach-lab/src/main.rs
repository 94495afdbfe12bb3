use clap::Parser;

use goldbach_lab::cli::{run, Cli};
use goldbach_lab::Error;

/// Exit codes: 0 success, 1 runtime failure (numerical, arc overlap,
/// cache, I/O), 2 bad invocation (clap reports its own parse errors
/// with the same code).
fn main() {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut diag = std::io::stderr().lock();
    let code = match run(&cli, &mut out, &mut diag) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}
