//! Monte Carlo simulation of Dunkl-type processes: single-site semigroup
//! estimators and finite-window approximations of interacting lattices.

pub mod config;
pub mod error;
pub mod fd;
pub mod lattice;
pub mod lyapunov;
pub mod rng;
pub mod runner;
pub mod site;
pub mod stats;

pub use config::{JumpMode, SimConfig};
pub use error::{Result, SimError};
pub use fd::{EnsembleEstimate, FdEngine};
pub use site::{Diagnostics, Label, SiteModel, SiteState};
pub use stats::Verdict;

/// Crate version, embedded in experiment summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
