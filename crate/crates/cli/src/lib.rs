//! Command-line front end for `betagos`: simulate, fit, moments, call and
//! benchmark subcommands, each writing its outputs plus a `manifest.json`
//! with the arguments, random streams and file digests of the run.

pub mod args;
pub mod benchmark;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use benchmark::{run_benchmark, BenchmarkConfig, BenchmarkReport};
pub use error::{CliError, CliResult, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
pub use manifest::RunManifest;

use args::Command;
use commands::Context;
use manifest::MANIFEST_FILE;

/// Run a parsed command line and write its manifest.
pub fn execute(cli: &Cli, argv: Vec<String>) -> CliResult<RunManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Other(e.to_string()))?;
    let mut ctx = Context::new(cli.seed, cli.format, &cli.out_dir)?;
    pool.install(|| match &cli.command {
        Command::Simulate(a) => commands::simulate::run(&mut ctx, a),
        Command::Fit(a) => commands::fit::run(&mut ctx, a),
        Command::Moments(a) => commands::moments::run(&mut ctx, a),
        Command::Call(a) => commands::call::run(&mut ctx, a),
        Command::Benchmark(a) => commands::benchmark::run(&mut ctx, a),
    })?;
    let Context { seed, inputs, substreams, mut out, .. } = ctx;
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        argv,
        config: serde_json::to_value(cli).map_err(|e| CliError::Other(e.to_string()))?,
        seed,
        substreams,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        outputs: out.written().to_vec(),
    };
    out.write_json(MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, argv) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
