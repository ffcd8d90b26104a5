use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use decosim::bose_hubbard::Boundary;
use decosim::spectrum::MomentumConvention;

mod commands;
mod config;
mod output;

/// Decoherence of a qubit coupled to an environment near a quantum phase
/// transition.
///
/// Exit status: 0 success, 1 oracle tolerance exceeded, 2 invalid
/// parameters, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "decosim", version)]
#[command(
    after_help = "Any long flag can also be given in a key=value file passed with --config FILE; \
flags on the command line win. DECOSIM_MAX_DIM overrides the Bose-Hubbard basis-dimension cap."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decoherence factor r(t) for an Ising-chain environment.
    Ising(IsingArgs),
    /// Echo overlap: evolve under lambda1, then under -lambda1.
    IsingEcho(EchoArgs),
    /// Survival amplitude and LDOS for a Bose-Hubbard environment.
    BoseHubbard(BoseHubbardArgs),
    /// Fitted envelope width across a range of couplings.
    Scan(ScanArgs),
    /// Compare the product formulas with brute-force spin-chain evolution.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    Paper,
    Antiperiodic,
}

impl From<Convention> for MomentumConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Paper => MomentumConvention::Paper,
            Convention::Antiperiodic => MomentumConvention::Antiperiodic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Periodic,
    Open,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Open => Boundary::Open,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Ising,
    BoseHubbard,
}

#[derive(Debug, Args)]
struct IsingChain {
    /// Number of spins N
    #[arg(long, default_value_t = 50)]
    spins: usize,
    /// Ising coupling J
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Transverse field of the initial Hamiltonian
    #[arg(long, default_value_t = 0.0)]
    lambda0: f64,
    #[arg(long, value_enum, default_value_t = Convention::Antiperiodic)]
    convention: Convention,
}

#[derive(Debug, Args)]
struct Window {
    /// End of the time window [default: envelope decays to 1e-4]
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points [default: enough to resolve the fastest mode]
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Args)]
struct IsingArgs {
    #[command(flatten)]
    chain: IsingChain,
    /// Transverse field during evolution
    #[arg(long, default_value_t = 5.0)]
    lambda1: f64,
    #[command(flatten)]
    window: Window,
    /// Add the predicted Gaussian envelope column
    #[arg(long)]
    envelope: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EchoArgs {
    #[command(flatten)]
    chain: IsingChain,
    #[arg(long, default_value_t = 40.0)]
    lambda1: f64,
    /// Window in total evolved time (twice the segment time)
    #[command(flatten)]
    window: Window,
    /// Add the large-field approximation column
    #[arg(long)]
    approx: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BoseHubbardLattice {
    #[arg(long, default_value_t = 6)]
    sites: usize,
    #[arg(long, default_value_t = 6)]
    bosons: usize,
    /// On-site interaction
    #[arg(long, default_value_t = 1.0)]
    u: f64,
    /// Hopping of the initial Hamiltonian
    #[arg(long, default_value_t = 0.0)]
    lambda0: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    boundary: BoundaryArg,
}

#[derive(Debug, Args)]
struct BoseHubbardArgs {
    #[command(flatten)]
    lattice: BoseHubbardLattice,
    /// Hopping during evolution
    #[arg(long, default_value_t = 20.0)]
    lambda1: f64,
    #[command(flatten)]
    window: Window,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    /// Number of coupling values (at least 5)
    #[arg(long)]
    lambda_steps: usize,
    /// Space the couplings logarithmically
    #[arg(long)]
    log: bool,
    /// Time at which |r|² is recorded for every coupling
    #[arg(long, default_value_t = 0.3)]
    probe_time: f64,
    #[arg(long, default_value_t = 200)]
    spins: usize,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    #[arg(long, value_enum, default_value_t = Convention::Antiperiodic)]
    convention: Convention,
    #[arg(long, default_value_t = 6)]
    sites: usize,
    #[arg(long, default_value_t = 6)]
    bosons: usize,
    #[arg(long, default_value_t = 1.0)]
    u: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    boundary: BoundaryArg,
    /// Field or hopping of the initial Hamiltonian
    #[arg(long, default_value_t = 0.0)]
    lambda0: f64,
    #[command(flatten)]
    window: Window,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Number of spins (at most 12)
    #[arg(long, default_value_t = 8)]
    spins: usize,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Initial field; at least 0.1 so the spin ground state is unique
    #[arg(long, default_value_t = 0.2)]
    lambda0: f64,
    #[arg(long, default_value_t = 5.0)]
    lambda1: f64,
    #[arg(long, value_enum, default_value_t = Convention::Antiperiodic)]
    convention: Convention,
    #[arg(long, default_value_t = 4.0)]
    t_max: f64,
    #[arg(long, default_value_t = 401)]
    steps: usize,
    /// JSON report
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(commands::EXIT_INVALID);
        }
    };
    let cli = Cli::parse_from(args);
    let result = match cli.command {
        Command::Ising(a) => commands::ising(a),
        Command::IsingEcho(a) => commands::ising_echo(a),
        Command::BoseHubbard(a) => commands::bose_hubbard(a),
        Command::Scan(a) => commands::scan(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
