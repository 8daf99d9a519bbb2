//! Reproducible experiment runner: JSON configs in, CSV and JSON artifacts out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::Path;

use serde_json::Value;

pub use error::{LabError, Result};
use report::Outcome;

pub const SUBCOMMANDS: [&str; 9] = ["calculus-check", "fd-sim", "gradient-bound", "lyapunov", "invariant-measure", "lattice-sim", "cauchy", "finite-speed", "ergodicity"];

/// Loads the config for `name`, runs it and returns the outcome, the raw
/// config and the output directory named in the file.
pub fn run(name: &str, config: &Path, seed: Option<u64>) -> Result<(Outcome, Value, Option<String>)> {
    use config::*;
    macro_rules! go {
        ($t:ty, $f:path) => {{
            let (cfg, raw) = load::<$t>(config, name)?;
            let out = cfg.out().map(str::to_string);
            ($f(&cfg, seed)?, raw, out)
        }};
    }
    Ok(match name {
        "calculus-check" => go!(CalculusConfig, experiments::calculus_check),
        "fd-sim" => go!(FdSimConfig, experiments::fd_sim),
        "gradient-bound" => go!(GradientConfig, experiments::gradient_bound),
        "lyapunov" => go!(LyapunovConfig, experiments::lyapunov),
        "invariant-measure" => go!(InvariantConfig, experiments::invariant_measure),
        "lattice-sim" => go!(LatticeSimConfig, experiments::lattice_sim),
        "cauchy" => go!(CauchyConfig, experiments::cauchy),
        "finite-speed" => go!(FiniteSpeedConfig, experiments::finite_speed),
        "ergodicity" => go!(ErgodicityConfig, experiments::ergodicity),
        other => return Err(LabError::Schema(format!("unknown experiment {other:?}"))),
    })
}

/// Exit code for a completed run: 0 unless the verdict is a failure.
pub fn verdict_exit_code(v: dunkl_sim::Verdict) -> i32 {
    match v {
        dunkl_sim::Verdict::Fail => 1,
        _ => 0,
    }
}

/// Writes `results.csv`, any experiment tables and `summary.json` into `dir`.
pub fn emit(dir: &Path, name: &str, outcome: &Outcome, config: &Value) -> Result<i32> {
    std::fs::create_dir_all(dir)?;
    report::write_results(&dir.join("results.csv"), &outcome.rows)?;
    for (file, header, rows) in &outcome.tables {
        report::write_table(&dir.join(file), header, rows)?;
    }
    let code = verdict_exit_code(outcome.verdict);
    report::write_json(&dir.join("summary.json"), &report::summary(name, outcome, config, code))?;
    Ok(code)
}
