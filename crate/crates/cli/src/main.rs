use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hostguest_cli::{CliError, Kind};

#[derive(Parser)]
#[command(name = "hostguest", version, about = "Single-molecule host-guest simulations")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads for sweeps. Output does not depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Print the JSON schema of a scenario kind's parameters.
    Schema { kind: Kind },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result: Result<(), CliError> = match args.command {
        Command::Run {
            config,
            output_dir,
            threads,
        } => hostguest_cli::run(&config, output_dir.as_deref(), threads).map(|r| {
            for f in &r.files {
                println!("{}", r.output_dir.join(f).display());
            }
        }),
        Command::Validate { config } => hostguest_cli::validate(&config).map(|s| {
            println!("ok: {} ({} point(s))", s.kind.name(), s.points.len());
        }),
        Command::Schema { kind } => {
            println!(
                "{}",
                serde_json::to_string_pretty(&kind.schema()).expect("schema serializes")
            );
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
