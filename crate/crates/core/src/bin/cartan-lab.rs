use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cartan_lab::{emit_report, load_scenario, run_checks, CheckId, Format, ScenarioError};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "cartan-lab",
    version,
    about = "Check connection identities over sampled chart points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file. Exit status: 0 all pass, 1 a check failed, 2 config error.
    Check {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        atol: Option<f64>,
        #[arg(long)]
        rtol: Option<f64>,
        /// Comma-separated check names.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
    /// List the registered checks.
    Checks,
}

fn run(cmd: Command) -> Result<bool, ScenarioError> {
    match cmd {
        Command::Checks => {
            for c in CheckId::ALL {
                println!("{:<20} {}", c.name(), c.description());
            }
            Ok(true)
        }
        Command::Check {
            config,
            format,
            seed,
            samples,
            atol,
            rtol,
            only,
        } => {
            let mut scenario = load_scenario(&config)?;
            scenario.set_samples(samples, seed)?;
            scenario.set_tolerance(atol, rtol)?;
            if let Some(names) = only {
                scenario.select(&names)?;
            }
            let report = run_checks(&scenario);
            let format = match format {
                OutputFormat::Json => Format::Json,
                OutputFormat::Text => Format::Text,
            };
            let bytes = emit_report(&report, format);
            let mut out = std::io::stdout().lock();
            // a closed pipe is not a check failure
            let _ = out.write_all(&bytes).and_then(|_| out.flush());
            Ok(report.all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
