mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Quantum discord, decoherence losses and resource budgets for bipartite states.
///
/// Exit codes: 0 ok, 1 property violation, 2 input error, 3 optimizer did not converge.
#[derive(Debug, Parser)]
#[command(name = "qdiscord", version)]
pub struct Cli {
    /// Seed for every random choice (optimizer starts, random states).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Pass/fail tolerance; each command has its own default.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,

    /// Optimizer starts.
    #[arg(long, global = true, default_value_t = 32)]
    pub starts: usize,

    /// Also write machine-readable CSV here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    /// Compare the optimized discord with a brute-force Bloch-sphere grid, e.g. `400x800`.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid_check: Option<(usize, usize)>,

    /// Use the discord-optimal basis for the primary budget rows.
    #[arg(long, global = true)]
    pub optimize: bool,

    /// Fixed measurement basis: `computational` or `file:<path>` (JSON `{"matrix": ...}`,
    /// columns are the basis vectors).
    #[arg(long, global = true, default_value = "computational")]
    pub basis: String,

    /// Run optimizer starts and sweep rows on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discord of a state file, with the optimal basis and an optimizer summary.
    Discord {
        input: PathBuf,
        /// Subsystem that is measured.
        #[arg(long, default_value = "B")]
        measured: String,
        #[arg(long, value_enum, default_value_t = PovmArg::Projective)]
        povm: PovmArg,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
    },
    /// Run a property suite on seeded random states.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Rate budget of a protocol before and after dephasing B.
    Budget {
        #[arg(value_enum)]
        protocol: ProtocolArg,
        input: PathBuf,
    },
    /// Discord and losses over a family parameter grid or random states, as CSV.
    Sweep {
        /// A state family (`werner`, `cc`, `cq`, `product`, `bell`) or `random`.
        family: String,
        /// `start:step:stop`, or parameter sets separated by `;` with values separated by `,`.
        #[arg(long)]
        grid: Option<String>,
        /// Number of random states.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Output file; falls back to `--csv`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PovmArg {
    Projective,
    Neumark,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    Ssa,
    Theorem1,
    Losses,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProtocolArg {
    Mother,
    Fqswd,
    Qsm,
    Sdc,
    Ed,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s.split_once(['x', 'X']).ok_or("expected NxM, e.g. 400x800")?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad N: {e}"))?;
    let m: usize = m.trim().parse().map_err(|e| format!("bad M: {e}"))?;
    if n == 0 || m == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((n, m))
}

/// How a command failed, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Property(String),
    Input(anyhow::Error),
    NonConvergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Property(_) => 1,
            Self::Input(_) => 2,
            Self::NonConvergence(_) => 3,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Property(msg) => eprintln!("property violated: {msg}"),
                Failure::Input(e) => eprintln!("error: {e:#}"),
                Failure::NonConvergence(msg) => eprintln!("not converged: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
