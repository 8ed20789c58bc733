use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlbm::experiments::Mode;
use qlbm::QlbmError;

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(name = "qlbm", version, about = "Quantum lattice-Boltzmann advection-diffusion runs")]
struct Cli {
    /// Worker threads for shot-level parallelism (default: all cores).
    #[arg(long, global = true, env = "QLBM_THREADS")]
    threads: Option<usize>,
    /// Suppress the summary printed to stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one case and write density.csv and report.json.
    Run(CaseArgs),
    /// Run a case at several shot counts and write sweep.csv.
    SweepShots {
        #[command(flatten)]
        case: CaseArgs,
        /// Shot counts, e.g. 1e3,1e4,1e5.
        #[arg(long = "shots-list", value_delimiter = ',', value_parser = parse_count, required = true)]
        shots_list: Vec<u64>,
        /// Seeds per shot count; sweep.csv reports the median MAPE.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Run a case at several step counts and write sweep.csv.
    SweepSteps {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long = "steps-list", value_delimiter = ',', required = true)]
        steps_list: Vec<usize>,
    },
    /// Run the dynamic and the presampled hybrid circuit on the same case.
    CompareHybrid(CaseArgs),
    /// Compare exact outcome enumeration against the classical solver.
    ValidateOracle {
        #[command(flatten)]
        case: CaseArgs,
        /// Largest accepted max-abs difference.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// List the shipped cases, optionally writing them as JSON files.
    ListCases {
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CaseArgs {
    /// Case configuration (JSON).
    #[arg(required_unless_present = "case", conflicts_with = "case")]
    config: Option<PathBuf>,
    /// Name of a shipped case instead of a file.
    #[arg(long)]
    case: Option<String>,
    /// Override the RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the shot count (accepts 1e6)
    #[arg(long, value_parser = parse_count)]
    shots: Option<u64>,
    /// Override the number of time steps
    #[arg(long)]
    steps: Option<usize>,
    /// digital, sampled, ensemble, hybrid or oracle
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Output directory (default: qlbm-output/<case name>)
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(f) if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 => Ok(f as u64),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: QlbmError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qlbm: cannot configure {n} threads: {e}");
            return ExitCode::from(4);
        }
    }
    let result = match cli.command {
        Command::Run(args) => commands::run(&args, cli.quiet),
        Command::SweepShots {
            case,
            shots_list,
            seeds,
        } => commands::sweep_shots(&case, &shots_list, seeds, cli.quiet),
        Command::SweepSteps { case, steps_list } => {
            commands::sweep_steps(&case, &steps_list, cli.quiet)
        }
        Command::CompareHybrid(args) => commands::compare_hybrid(&args, cli.quiet),
        Command::ValidateOracle { case, tolerance } => {
            commands::validate_oracle(&case, tolerance, cli.quiet)
        }
        Command::ListCases { write } => commands::list_cases(write.as_deref(), cli.quiet),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlbm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
