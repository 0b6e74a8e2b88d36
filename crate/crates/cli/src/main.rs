//! degenctrl: drive the solvers, inequality checks and HUM control runs of
//! the degenerate coupled-system laboratory from flat config files.

use clap::{Parser, Subcommand, ValueEnum};
use degenctrl_cli::commands::{self, CommandError, Format, OutputOptions};
use degenctrl_cli::config::parse_config;
use degenctrl_cli::json::Json;
use degenctrl_cli::sweep;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable holding the default output directory.
const OUT_ENV: &str = "DEGENCTRL_OUT";

#[derive(Parser)]
#[command(
    name = "degenctrl",
    version,
    about = "Numerical laboratory for a coupled degenerate parabolic control system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to a key=value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $DEGENCTRL_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format for the check commands.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Worker pool size for sweeps; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Forward solve of the controlled system with h = 0.
    Solve(RunArgs),
    /// Forward solve of the adjoint system.
    Adjoint(RunArgs),
    /// Penalized HUM null-control run, one result per epsilon.
    Hum(RunArgs),
    /// Estimate the observability constant of the adjoint system.
    Observability(RunArgs),
    /// Hardy inequality table over gamma and monomial profiles.
    CheckHardy(RunArgs),
    /// Local gradient bound along an adjoint trajectory.
    CheckCaccioppoli(RunArgs),
    /// Weighted estimates over the s-grid, all variants.
    CheckCarleman(RunArgs),
    /// Weight-family admissibility, ordering and Theta-bound report.
    CheckWeights(RunArgs),
    /// Cartesian parameter sweep of a named pipeline.
    Sweep(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Solve(a)
            | Command::Adjoint(a)
            | Command::Hum(a)
            | Command::Observability(a)
            | Command::CheckHardy(a)
            | Command::CheckCaccioppoli(a)
            | Command::CheckCarleman(a)
            | Command::CheckWeights(a)
            | Command::Sweep(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Adjoint(_) => "adjoint",
            Command::Hum(_) => "hum",
            Command::Observability(_) => "observability",
            Command::CheckHardy(_) => "check-hardy",
            Command::CheckCaccioppoli(_) => "check-caccioppoli",
            Command::CheckCarleman(_) => "check-carleman",
            Command::CheckWeights(_) => "check-weights",
            Command::Sweep(_) => "sweep",
        }
    }
}

fn run(command: &Command) -> Result<Vec<PathBuf>, CommandError> {
    let args = command.args();
    let text = std::fs::read_to_string(&args.config).map_err(|source| CommandError::Io {
        path: args.config.clone(),
        source,
    })?;
    let config = parse_config(&text)?;
    let dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = OutputOptions {
        dir,
        format: match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        jobs: args.jobs,
    };
    match command {
        Command::Solve(_) => commands::run_solve(&config, &opts),
        Command::Adjoint(_) => commands::run_adjoint(&config, &opts),
        Command::Hum(_) => commands::run_hum(&config, &opts),
        Command::Observability(_) => commands::run_observability(&config, &opts),
        Command::CheckHardy(_) => commands::run_check_hardy(&config, &opts),
        Command::CheckCaccioppoli(_) => commands::run_check_caccioppoli(&config, &opts),
        Command::CheckCarleman(_) => commands::run_check_carleman(&config, &opts),
        Command::CheckWeights(_) => commands::run_check_weights(&config, &opts),
        Command::Sweep(_) => sweep::run_sweep(&config, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (category, code) = e.category();
            let record = Json::object(vec![(
                "error",
                Json::object(vec![
                    ("category", Json::Str(category.into())),
                    ("command", Json::Str(cli.command.name().into())),
                    ("message", Json::Str(e.to_string())),
                    ("exit_code", Json::Int(code as i64)),
                ]),
            )]);
            eprint!("{}", record.render());
            ExitCode::from(code as u8)
        }
    }
}
