use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thermoq_cli::config::{schema_json, TamperSpec};
use thermoq_cli::{RunOutcome, UsageError, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "thermoq", version, about = "Heat-based quantum thermometry experiments")]
#[command(after_help = "Results go to the configured path; set THERMOQ_OUTPUT_DIR to redirect them.\n\
Exit status: 0 ok, 1 verification failure, 2 usage error.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON configuration file.
    Run { config: PathBuf },
    /// Check every identity on random model instances.
    CrossValidate {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        draws: u64,
        /// Deliberately corrupt the heat bookkeeping (mutation check).
        #[arg(long, value_enum, default_value_t = TamperSpec::None)]
        tamper: TamperSpec,
    },
    /// Print the JSON schema of run configurations.
    Schema,
}

fn finish(result: Result<anyhow::Result<RunOutcome>, UsageError>) -> ExitCode {
    match result {
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
        Ok(Ok(out)) => {
            println!("{}", out.report.summary());
            println!("wrote {} and {}", out.table.display(), out.report_file.display());
            ExitCode::from(out.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => finish(thermoq_cli::run_file(&config)),
        Command::CrossValidate { seed, draws, tamper } => {
            finish(thermoq_cli::cross_validate(seed, draws as usize, tamper))
        }
        Command::Schema => {
            // A closed pipe (e.g. `| head`) is not an error for a printer.
            let _ = writeln!(std::io::stdout(), "{}", schema_json());
            ExitCode::SUCCESS
        }
    }
}
