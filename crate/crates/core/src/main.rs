use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use heritage_econ::app::config::{help_text, ConfigMap};
use heritage_econ::app::ingest::read_file;
use heritage_econ::app::run::run_and_write;
use heritage_econ::app::{AppError, RunConfig, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, clap::Subcommand)]
enum Command {
    /// Stage rates, detection risks and registration coverage
    Funnel,
    /// Total Economic Value chain and tourism baseline
    Tev,
    /// Supply curve, equilibrium and imprisonment elasticity sweep
    Market,
    /// Agent-based population and enforcement sweep
    Simulate,
    /// Three counteraction alternatives and their opportunity cost
    Scenario,
    /// Fit the detection rubric to target probabilities
    Calibrate,
    /// Every section above
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Funnel => Subcommand::Funnel,
            Command::Tev => Subcommand::Tev,
            Command::Market => Subcommand::Market,
            Command::Simulate => Subcommand::Simulate,
            Command::Scenario => Subcommand::Scenario,
            Command::Calibrate => Subcommand::Calibrate,
            Command::All => Subcommand::All,
        }
    }
}

/// Economics of crimes against cultural heritage: detection funnel,
/// valuation, crime market, microsimulation and policy scenarios.
#[derive(Debug, Parser)]
#[command(name = "heritage", version, after_long_help = help_text(), after_help = "Run with --help to list every config key.")]
struct Cli {
    /// Config file of `key = value` lines
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Simulation seed (overrides `seed`)
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// What to print on stdout; report.json and the CSV tables are always written
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

fn load_config(cli: &Cli) -> Result<RunConfig, AppError> {
    let mut raw = match &cli.config {
        Some(path) => ConfigMap::parse(&read_file(path)?)?,
        None => ConfigMap::defaults(),
    };
    if let Some(out) = &cli.out {
        raw.set("output_dir", out.display().to_string());
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", seed.to_string());
    }
    RunConfig::from_map(raw)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(&cli).and_then(|cfg| run_and_write(cli.command.into(), &cfg));
    match result {
        Ok((report, _)) => {
            match cli.format {
                Format::Json => print!("{}", report.to_json()),
                Format::Csv => print!("{}", report.tables_text()),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "code": e.code(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
