use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Adjustable regret experiments: curves, competitive ratios, one-way trading.
#[derive(Parser, Debug)]
#[command(name = "arc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample D(beta) on a beta grid and write `beta,value,policy_id` CSV
    Sweep(SweepArgs),
    /// Competitive ratio as the root of D(beta) = 0
    Cr(CrArgs),
    /// Closed-form one-way trading curve, convexity verdict and grid cross-check
    Oneway(OnewayArgs),
    /// Replay the optimal one-way policy on a price path or random paths
    Simulate(SimulateArgs),
    /// Run the builtin verification corpus
    Verify(VerifyArgs),
}

/// Problem file, builtin corpus name, or an inline `oneway m=.. M=.. T=..` line.
#[derive(Args, Debug)]
struct ProblemArg {
    #[arg(value_name = "PROBLEM")]
    problem: String,
}

#[derive(Args, Debug, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 1.0)]
    stop: f64,
    /// Number of betas, endpoints included (at least 2)
    #[arg(long, default_value_t = 11)]
    count: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[command(flatten)]
    grid: GridArgs,
    /// CSV output; stdout when omitted
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Two-column plot data; defaults to the CSV path with a `.dat` extension
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CrArgs {
    #[command(flatten)]
    problem: ProblemArg,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

/// Price band and horizon of a one-way market.
#[derive(Args, Debug, Clone, Copy)]
struct MarketArgs {
    /// Price floor m
    #[arg(long = "m")]
    min_price: f64,
    /// Price cap M
    #[arg(long = "M")]
    max_price: f64,
    /// Number of periods T
    #[arg(long = "T")]
    periods: usize,
}

#[derive(Args, Debug)]
struct OnewayArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 2.0)]
    stop: f64,
    #[arg(long, default_value_t = 101)]
    count: usize,
    /// Curve CSV output; stdout when omitted
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Compare against the discretized solve with this many price points
    #[arg(long)]
    crosscheck: Option<usize>,
    /// Allocation granularity of the cross-check grid
    #[arg(long, default_value_t = 32)]
    alloc: usize,
    /// Beta of the policy snapshot
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Price-path file, one price per line
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    path: Option<PathBuf>,
    /// Number of seeded uniform random paths
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Trace CSV (path mode) or per-path summary CSV (random mode)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Restrict to these checks (oracle, correspondence, slope, convexity, cr, elimination)
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => commands::sweep(&a),
        Command::Cr(a) => commands::cr(&a),
        Command::Oneway(a) => commands::oneway(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::EXIT_INPUT)
        }
    }
}
