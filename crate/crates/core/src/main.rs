use std::process::ExitCode;

use clap::Parser;
use qbackflow::cli::{run, Cli, EXIT_USAGE, THREADS_ENV};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Ok(threads) = std::env::var(THREADS_ENV) {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                // Fails only if a global pool already exists, which cannot happen this early.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("usage error: {THREADS_ENV} must be a positive integer, got '{threads}'");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
    }
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    match run(&cli, &mut stdout, &mut stderr) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qbackflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
