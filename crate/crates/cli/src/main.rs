mod commands;
mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use cascade_core::CascadeError;
use config::{Format, Options};

#[derive(Parser)]
#[command(name = "cascade")]
#[command(about = "Exact myopic and strategic cascade games on networks")]
#[command(version)]
struct Cli {
    /// JSON file with the same keys as the flags; flags win on conflict
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    options: Options,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Exact performance of a family under a schedule
    Solve,
    /// Monte Carlo performance estimate with seeded trials
    Simulate,
    /// Exact (p, pi) grid for cliques or stars, CSV by default
    Sweep,
    /// Clique class: PNC, TC or OTHER
    Classify,
    /// Star threshold strategies for pi < 1
    Thresholds,
    /// Best committed schedule against the subgame-optimal scheduler
    Stackelberg,
    /// Search five-node three-group graphs for the published pair of values
    #[command(name = "recover-fig4")]
    RecoverFig4,
    /// Run a verification campaign
    Verify,
    /// Compare the block solver with brute force on the expansion
    #[command(name = "oracle-check")]
    OracleCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Classify => "classify",
            Command::Thresholds => "thresholds",
            Command::Stackelberg => "stackelberg",
            Command::RecoverFig4 => "recover-fig4",
            Command::Verify => "verify",
            Command::OracleCheck => "oracle-check",
        }
    }

    /// Fills the defaults a command uses so the echoed config is complete.
    fn resolve(self, mut o: Options) -> Options {
        let default = |slot: &mut Option<String>, v: &str| {
            slot.get_or_insert_with(|| v.to_string());
        };
        match self {
            Command::RecoverFig4 => {
                default(&mut o.p, "18/100");
                default(&mut o.pi, "185/100");
            }
            Command::Verify if o.campaign.as_deref() == Some("council") => {
                default(&mut o.p, "45/100");
                default(&mut o.pi, "5/2");
                o.k.get_or_insert(2500);
                o.m.get_or_insert(50);
                o.trials.get_or_insert(10_000);
            }
            Command::Solve | Command::Simulate | Command::OracleCheck => {
                default(&mut o.mode, "both");
                default(&mut o.schedule, "optimal");
            }
            _ => {}
        }
        if matches!(self, Command::Simulate | Command::Verify) {
            o.seed.get_or_insert(1);
        }
        if self == Command::Simulate {
            o.trials.get_or_insert(10_000);
        }
        o.format.get_or_insert(if self == Command::Sweep { Format::Csv } else { Format::Json });
        o
    }

    fn run(self, o: &Options) -> Result<commands::Rendered, CliError> {
        match self {
            Command::Solve => commands::solve(o),
            Command::Simulate => commands::simulate(o),
            Command::Sweep => commands::run_sweep(o),
            Command::Classify => commands::classify(o),
            Command::Thresholds => commands::thresholds(o),
            Command::Stackelberg => commands::stackelberg(o),
            Command::RecoverFig4 => commands::fig4(o),
            Command::Verify => commands::verify(o),
            Command::OracleCheck => commands::oracle_check(o),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(CascadeError),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(CascadeError::CapExceeded { .. }) => "budget",
            CliError::Core(_) => "solver",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Exit status when a command ran but its check did not hold.
const CHECK_FAILED: u8 = 3;

fn load_config(path: &PathBuf) -> Result<Options, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let base = match &cli.config {
        Some(path) => load_config(path)?,
        None => Options::default(),
    };
    let options = cli.command.resolve(base.overlay(cli.options));
    let echo = json!({"command": cli.command.name(), "config": options});
    eprintln!("{echo}");
    if let Some(jobs) = options.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    let rendered = cli.command.run(&options)?;
    let text = rendered.text(options.format.unwrap_or(Format::Json))?;
    match &options.output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(CliError::Io(format!("stdout: {e}"))),
            _ => {}
        },
    }
    Ok(rendered.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) => {
            eprintln!("{}", json!({"error": {"kind": e.kind(), "message": e.message()}}));
            ExitCode::from(e.exit_code())
        }
    }
}
