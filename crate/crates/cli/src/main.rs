use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

use commands::{Outcome, Settings, UsageError};

#[derive(Parser, Debug)]
#[command(
    name = "swapavn",
    version,
    about = "Verification suites for the entanglement-swapping AVN argument"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for this invocation's reports.
    #[arg(long, global = true, default_value = "swapavn-out")]
    out: PathBuf,

    /// Format of tabular outputs (trials, noise scan). Reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[arg(long, global = true, default_value_t = 100_000)]
    shots: u64,

    #[arg(long, global = true, default_value_t = 1.0)]
    eta1: f64,

    #[arg(long, global = true, default_value_t = 1.0)]
    eta23: f64,

    #[arg(long, global = true, default_value_t = 1.0)]
    eta4: f64,

    /// Comma-separated visibilities, e.g. `0,0.25,0.5,0.75,1`.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        default_value = "0,0.25,0.5,0.75,1"
    )]
    visibility_grid: Vec<f64>,

    /// Layout file for `optics-verify`; the built-in selector when absent.
    #[arg(long, global = true)]
    layout: Option<PathBuf>,

    /// PBS reflection phase. `optics-search` tries all three when absent.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pbs_phase: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Bell-basis algebra, eigenrelations and the operator identity.
    VerifyAlgebra,
    /// Exhaustive local-realistic certificate over all 256 valuations.
    Avn,
    /// LHV, Cirel'son and quantum bounds of the Bell operator.
    Bounds,
    /// ⟨M⟩ under white noise and the visibility threshold.
    NoiseScan,
    /// Seeded event-ready Monte Carlo.
    Sample,
    /// Exhaustive search for coincidence selectors.
    OpticsSearch,
    /// Checks one selector layout.
    OpticsVerify,
    /// Every suite, one subdirectory each.
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let settings = Settings::from_flags(
        cli.format,
        cli.seed,
        cli.shots,
        [cli.eta1, cli.eta23, cli.eta4],
        &cli.visibility_grid,
        cli.layout.as_deref(),
        cli.pbs_phase.as_deref(),
    )?;
    let (name, outcome) = match cli.command {
        Command::VerifyAlgebra => ("verify-algebra", commands::verify_algebra()?),
        Command::Avn => ("avn", commands::avn()?),
        Command::Bounds => ("bounds", commands::bounds()?),
        Command::NoiseScan => ("noise-scan", commands::noise_scan(&settings)?),
        Command::Sample => ("sample", commands::sample(&settings)?),
        Command::OpticsSearch => ("optics-search", commands::optics_search(&settings)?),
        Command::OpticsVerify => ("optics-verify", commands::optics_verify(&settings)?),
        Command::All => ("all", commands::all(&settings)?),
    };
    commands::write_invocation(&cli.out, name, &settings, &outcome)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) if outcome.pass() => ExitCode::SUCCESS,
        Ok(outcome) => {
            if let Some(check) = outcome.first_failure() {
                eprintln!("check failed: {}", check.name);
            }
            ExitCode::from(1)
        }
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
