use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// How the reflection-group component of the state is carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpMode {
    /// One sampled group element per replica.
    Sampled,
    /// Exact conditional law over the group given the chamber path.
    Averaged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub n_replicas: usize,
    pub seed: u64,
    /// Maximum drift displacement per substep.
    pub delta_max: f64,
    /// Cap on the total jump probability per substep.
    pub p_max: f64,
    /// Distance to a wall below which the boundary layer step is used.
    pub eps_hyp: f64,
    pub jump_mode: JumpMode,
    /// Substeps allowed per coarse step before a replica is flagged.
    pub max_substeps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            n_replicas: 10_000,
            seed: 1,
            delta_max: 1.0,
            p_max: 0.1,
            eps_hyp: 1e-6,
            jump_mode: JumpMode::Averaged,
            max_substeps: 100_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_final >= 0.0) {
            return bad("t_final must be nonnegative");
        }
        if !(self.p_max > 0.0 && self.p_max <= 0.5) {
            return bad("p_max must lie in (0, 0.5]");
        }
        if !(self.delta_max > 0.0) {
            return bad("delta_max must be positive");
        }
        if !(self.eps_hyp > 0.0) {
            return bad("eps_hyp must be positive");
        }
        if self.n_replicas < 2 {
            return bad("at least two replicas are needed for a standard error");
        }
        if self.max_substeps == 0 {
            return bad("max_substeps must be positive");
        }
        Ok(())
    }
}
