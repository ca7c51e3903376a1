use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use matterwave_cli::{load_scenario_with, run_scenario, EXIT_NUMERICAL, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "matterwave", version, about = "Matter-wave interference on moving screens")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a scenario file.
    Run {
        scenario: PathBuf,
        /// Overrides `output.dir` from the scenario.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// `key=value` with a dotted key, e.g. `grid.points=8192`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        scenario,
        output_dir,
        overrides,
        quiet,
    } = match Cli::try_parse() {
        Ok(cli) => cli.command,
        Err(e) => {
            let _ = e.print();
            // usage errors count as invalid input
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let scn = match load_scenario_with(&scenario, &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let out = output_dir.unwrap_or_else(|| scn.output_dir.clone());
    match run_scenario(&scn, &out) {
        Ok(summary) => {
            if !quiet {
                println!("{}", summary.headline);
                for f in &summary.files {
                    println!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL as u8)
        }
    }
}
