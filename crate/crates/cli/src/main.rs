use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::{Failure, Rendered};

/// Interactive communication cost of 2-D nearest-lattice-point decoding.
#[derive(Debug, Parser)]
#[command(name = "latcomm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    json: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolName {
    /// Bit exchange for `min(x1, x2)` on the unit square.
    BitExchange,
    /// Voronoi refinement of a Babai cell (needs `--rho` and `--theta`).
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionSource {
    BitExchange,
    Quadrant,
    SelfSimilar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    RatioCurve,
    Convergence,
    Subdivision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    Converse,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct LatticeArgs {
    /// Length of the second basis vector.
    #[arg(long)]
    pub rho: f64,
    /// Angle between the basis vectors, in radians.
    #[arg(long)]
    pub theta: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo estimate of bits and rounds for a protocol.
    Simulate {
        #[arg(long, value_enum, default_value_t = ProtocolName::BitExchange)]
        protocol: ProtocolName,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = commands::DEFAULT_SEED, value_parser = parse_u64)]
        seed: u64,
        #[arg(long, default_value_t = commands::DEFAULT_MAX_DEPTH)]
        max_depth: u32,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        /// Write one comma-separated transcript per run to this file.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Strip and row distributions and the average refinement cost.
    LatticeRates {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Nearest lattice point found by rounding plus the refinement protocol.
    LatticeNearest {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = commands::DEFAULT_MAX_DEPTH)]
        max_depth: u32,
    },
    /// Conditional entropy of the self-similar partition with corner `v`.
    EntropyRatio {
        #[arg(long)]
        v: f64,
    },
    /// Golden-section minimum of the entropy ratio.
    OptimizeRatio {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Print a partition read from JSON or induced by a protocol.
    PartitionShow {
        /// Partition JSON file.
        #[arg(long = "in", conflicts_with = "protocol")]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        protocol: Option<PartitionSource>,
        #[arg(long, default_value_t = 4)]
        max_depth: u32,
        #[arg(long, default_value_t = 0.5)]
        v: f64,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        /// Include the exhaustive grid oracle.
        #[arg(long)]
        all: bool,
        /// Grid resolution for `--all`, a multiple of 4.
        #[arg(long, default_value_t = 96)]
        grid_units: u32,
    },
    /// CSV series for plotting.
    PlotData {
        #[arg(long, value_enum)]
        which: PlotKind,
        #[arg(long, default_value_t = 64)]
        resolution: u32,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
    },
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("{s:?} is not a 64-bit unsigned integer: {e}"))
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("LATCOMM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("LATCOMM_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

fn dispatch(command: Command) -> Result<Rendered, Failure> {
    match command {
        Command::Simulate {
            protocol,
            samples,
            seed,
            max_depth,
            rho,
            theta,
            transcripts,
        } => {
            let lattice = match (protocol, rho, theta) {
                (ProtocolName::Lattice, Some(rho), Some(theta)) => Some(LatticeArgs { rho, theta }),
                (ProtocolName::Lattice, ..) => {
                    return Err(Failure::Usage("--protocol lattice needs --rho and --theta".into()))
                }
                _ => None,
            };
            let threads = threads_from_env()?;
            commands::simulate(lattice, samples, seed, max_depth, threads, transcripts.as_deref())
        }
        Command::LatticeRates { lattice } => commands::lattice_rates(lattice),
        Command::LatticeNearest {
            lattice,
            x,
            y,
            max_depth,
        } => commands::lattice_nearest(lattice, x, y, max_depth),
        Command::EntropyRatio { v } => commands::entropy_ratio(v),
        Command::OptimizeRatio { tol } => commands::optimize_ratio(tol),
        Command::PartitionShow {
            input,
            protocol,
            max_depth,
            v,
        } => commands::partition_show(input.as_deref(), protocol, max_depth, v),
        Command::Verify {
            target: VerifyTarget::Converse,
            all,
            grid_units,
        } => commands::verify_converse(all.then_some(grid_units)),
        Command::PlotData {
            which,
            resolution,
            rho,
            theta,
        } => commands::plot_data(which, resolution, rho.zip(theta).map(|(rho, theta)| LatticeArgs { rho, theta })),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.output.json { Format::Json } else { cli.output.format };
    let rendered = match dispatch(cli.command) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let text = match format {
        Format::Json => rendered.json,
        Format::Csv => rendered.csv,
        Format::Human => rendered.human,
    };
    if let Err(e) = emit(&text, cli.output.out.as_ref()) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if rendered.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::from(1)
    }
}
