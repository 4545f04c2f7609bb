//! Command-line front end for the `binmix` library.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod output;

use args::{Cli, Command};
use commands::Context;
use error::{CliError, CliResult};

/// Runs a parsed command line. `raw` are the process arguments after the
/// program name, used for the metadata header.
pub fn run(cli: &Cli, raw: Vec<String>) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second initialization within one process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let ctx = Context {
        args: output::recorded_args(raw),
        quiet: false,
    };
    match &cli.command {
        Command::Estimate(a) => commands::estimate(&ctx, a),
        Command::Ci(a) => commands::ci(&ctx, a),
        Command::Lepski(a) => commands::lepski(&ctx, a),
        Command::Diff(a) => commands::diff(&ctx, a),
        Command::Sim1(a) => commands::sim1(&ctx, a),
        Command::Sim2(a) => commands::sim2(&ctx, a),
        Command::Coverage(a) => commands::coverage(&ctx, a),
        Command::BernsteinCheck(a) => commands::bernstein_check(&ctx, a),
    }
}
