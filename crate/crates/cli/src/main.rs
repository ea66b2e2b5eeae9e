use std::path::PathBuf;
use std::process::ExitCode;

use bitop_cli::checks::select;
use bitop_cli::config::{resolve, Overrides, RawConfig};
use bitop_cli::{commands, CliError, EXIT_CHECK_FAILED, EXIT_ERROR};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bitop", version, about = "Numerical laboratory for the Lagrange bitop on so(4) x so(4)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equations of motion and write trajectory.csv and run.json
    Simulate(Common),
    /// Run the verification suite and write report.json; exit 1 if a check fails
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run only the named check (repeatable)
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
    },
    /// Spectral curve data of the initial state
    Spectral(Common),
    /// Reduction to the two twisted tops along the trajectory
    Reduce(Common),
    /// Degree-N hierarchy: degrees, genus, covering split, flow residuals
    Hierarchy(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config with dotted keys (params.a = 1.0); defaults apply when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for every random draw; overrides the config
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Accept |chi12| = |chi34|
    #[arg(long)]
    allow_degenerate: bool,
}

fn setup(c: &Common) -> Result<bitop_cli::config::RunSetup, CliError> {
    let raw = match &c.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    resolve(
        &raw,
        &Overrides {
            seed: c.seed,
            allow_degenerate: c.allow_degenerate,
        },
    )
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(c) => commands::simulate(&setup(&c)?, &c.out).map(|_| 0),
        Command::Verify { common, checks } => {
            let selection = select(&checks)?;
            let report = commands::verify(&setup(&common)?, &selection, &common.out)?;
            for c in &report.checks {
                let status = match (&c.skipped, c.pass) {
                    (Some(_), _) => "skip",
                    (None, true) => "pass",
                    (None, false) => "FAIL",
                };
                println!("{status} {:<28} value={:e} tol={:e}", c.name, c.value, c.tolerance);
            }
            let failed = report.failures();
            if failed.is_empty() {
                Ok(0)
            } else {
                eprintln!("check failed: {}", failed.join(", "));
                Ok(EXIT_CHECK_FAILED)
            }
        }
        Command::Spectral(c) => commands::spectral(&setup(&c)?, &c.out).map(|_| 0),
        Command::Reduce(c) => commands::reduce(&setup(&c)?, &c.out).map(|_| 0),
        Command::Hierarchy(c) => commands::hierarchy(&setup(&c)?, &c.out).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
