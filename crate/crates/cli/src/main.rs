use std::process::ExitCode;

use clap::Parser;
use curvature_gauge_cli::{render_report, run, thread_cap, write_outputs, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = thread_cap() {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = write_outputs(&cli.out, &outcome) {
        eprintln!("error: writing to {}: {e}", cli.out.display());
        return ExitCode::FAILURE;
    }
    print!("{}", render_report(&outcome.report));
    if outcome.report.failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
