use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.quiet { "error" } else { "warn" }))
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::IngestGraph(a) => commands::ingest_graph(a),
        Command::Project(a) => commands::project(a),
        Command::Validate(a) => commands::validate(a),
        Command::Kmeans(a) => commands::kmeans(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Failure::Usage(_) => 1,
                Failure::Data(_) => 2,
                Failure::Numerical(_) => 3,
            })
        }
    }
}
