use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dunkl_lab::{emit, run, LabError};

/// Verification experiments for Dunkl-type Markov semigroups.
#[derive(Parser)]
#[command(name = "dunkl-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `out` or `./out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact identity suite and generator decomposition.
    CalculusCheck(Common),
    /// Monte Carlo estimates of P_t f with closed-form moment oracles.
    FdSim(Common),
    /// Symmetrised gradient bound at probe points.
    GradientBound(Common),
    /// Lyapunov inequality and boundedness of E rho(X_t).
    Lyapunov(Common),
    /// Invariant measure by quadrature and long-run moments.
    InvariantMeasure(Common),
    /// Lattice semigroup estimates on a finite window.
    LatticeSim(Common),
    /// Convergence of box approximations.
    Cauchy(Common),
    /// Decay of site gradients with distance.
    FiniteSpeed(Common),
    /// Coalescence of two initial configurations.
    Ergodicity(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::CalculusCheck(c) => ("calculus-check", c),
            Command::FdSim(c) => ("fd-sim", c),
            Command::GradientBound(c) => ("gradient-bound", c),
            Command::Lyapunov(c) => ("lyapunov", c),
            Command::InvariantMeasure(c) => ("invariant-measure", c),
            Command::LatticeSim(c) => ("lattice-sim", c),
            Command::Cauchy(c) => ("cauchy", c),
            Command::FiniteSpeed(c) => ("finite-speed", c),
            Command::Ergodicity(c) => ("ergodicity", c),
        }
    }
}

fn threads() -> Result<(), LabError> {
    let Ok(v) = std::env::var("DUNKL_LAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| LabError::Schema(format!("DUNKL_LAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| LabError::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    let result = threads().and_then(|_| run(name, &common.config, common.seed)).and_then(|(outcome, raw, cfg_out)| {
        let dir = common.out.clone().or(cfg_out.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
        let code = emit(&dir, name, &outcome, &raw)?;
        eprintln!("{name}: {} ({} rows) -> {}", outcome.verdict.as_str(), outcome.rows.len(), dir.display());
        for n in &outcome.notes {
            eprintln!("note: {n}");
        }
        Ok(code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
