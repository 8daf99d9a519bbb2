//! Replica loop shared by the single-site and lattice engines.
//!
//! A batch is a set of members (initial configurations on a window of
//! sites) integrated with common random numbers: each site owns one random
//! stream per replica, and all members at that site share its substep grid
//! and increments. Interaction amplitudes are frozen per coarse step from
//! the configuration at the start of the step.

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::rng::stream;
use crate::site::{Diagnostics, SiteModel, SiteState};

/// Initial data of one member at one site: point and left multipliers.
#[derive(Clone, Debug)]
pub struct SiteInit {
    pub x0: Vec<f64>,
    pub lefts: Vec<usize>,
}

/// Finite-range coupling through the amplitudes `eps_l mean_j v(|y_j|^2)`.
pub struct Coupling<'a> {
    pub eps: &'a [f64],
    pub neighbors: &'a [Vec<usize>],
    pub v: &'a (dyn Fn(f64) -> f64 + Sync),
    /// `masks[member][site]`: interaction switched on at the site.
    pub masks: &'a [Vec<bool>],
}

pub struct Batch<'a> {
    pub model: &'a SiteModel,
    pub cfg: &'a SimConfig,
    /// Stream code per site.
    pub codes: &'a [u64],
    /// `init[member][site]`.
    pub init: &'a [Vec<SiteInit>],
    pub coupling: Option<Coupling<'a>>,
    /// Sorted checkpoint times.
    pub times: &'a [f64],
}

/// Per-replica rows of evaluated quantities, flagged replicas removed.
#[derive(Clone, Debug)]
pub struct BatchOutput {
    pub rows: Vec<Vec<f64>>,
    pub n_total: usize,
    pub n_flagged: usize,
    pub diagnostics: Diagnostics,
}

impl BatchOutput {
    pub fn unreliable(&self) -> bool {
        self.n_flagged as f64 > 0.01 * self.n_total as f64
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// States indexed `[site][member]`.
pub type WindowStates = Vec<Vec<SiteState>>;

impl<'a> Batch<'a> {
    fn n_sites(&self) -> usize {
        self.codes.len()
    }

    fn initial(&self) -> WindowStates {
        (0..self.n_sites())
            .map(|l| self.init.iter().map(|m| self.model.init_state(&m[l].x0, &m[l].lefts, self.cfg.jump_mode)).collect())
            .collect()
    }

    fn set_amplitudes(&self, states: &mut WindowStates) {
        let Some(c) = &self.coupling else { return };
        for m in 0..self.init.len() {
            for l in 0..self.n_sites() {
                let a = if c.masks[m][l] && c.eps[l] != 0.0 && !c.neighbors[l].is_empty() {
                    let s: f64 = c.neighbors[l]
                        .iter()
                        .map(|&j| {
                            let y = &states[j][m].y;
                            (c.v)(y.iter().map(|v| v * v).sum())
                        })
                        .sum();
                    c.eps[l] * s / c.neighbors[l].len() as f64
                } else {
                    0.0
                };
                states[l][m].amplitude = a;
            }
        }
    }

    /// Runs one replica, calling `eval(checkpoint, states, row)` at each checkpoint.
    pub fn replica<F>(&self, r: u64, eval: &F) -> (Option<Vec<f64>>, Diagnostics)
    where
        F: Fn(usize, &WindowStates, &mut Vec<f64>),
    {
        let mut states = self.initial();
        let mut rngs: Vec<_> = self.codes.iter().map(|&c| stream(self.cfg.seed, r, c)).collect();
        let mut scratch: Vec<_> = (0..self.n_sites()).map(|_| self.model.scratch()).collect();
        let mut diag = Diagnostics::default();
        let mut row = Vec::new();
        let mut t = 0.0;
        let dt = self.cfg.dt;
        for (ci, &tc) in self.times.iter().enumerate() {
            let n_steps = ((tc - t) / dt - 1e-9).ceil().max(0.0) as usize;
            for s in 0..n_steps {
                let h = if s + 1 == n_steps { tc - t - (n_steps - 1) as f64 * dt } else { dt };
                self.set_amplitudes(&mut states);
                for l in 0..self.n_sites() {
                    self.model.advance(&mut states[l], h, self.cfg, &mut rngs[l], &mut scratch[l], &mut diag);
                }
            }
            t = tc;
            eval(ci, &states, &mut row);
        }
        let flagged = states.iter().any(|site| site.iter().any(|s| s.flagged));
        (if flagged { None } else { Some(row) }, diag)
    }

    /// Runs all replicas in parallel; rows keep replica order.
    pub fn run<F>(&self, eval: F) -> BatchOutput
    where
        F: Fn(usize, &WindowStates, &mut Vec<f64>) + Sync,
    {
        let n = self.cfg.n_replicas;
        let results: Vec<(Option<Vec<f64>>, Diagnostics)> = (0..n as u64).into_par_iter().map(|r| self.replica(r, &eval)).collect();
        let mut diagnostics = Diagnostics::default();
        let mut rows = Vec::with_capacity(n);
        for (row, d) in results {
            diagnostics.merge(&d);
            if let Some(row) = row {
                rows.push(row);
            }
        }
        let n_flagged = n - rows.len();
        BatchOutput { rows, n_total: n, n_flagged, diagnostics }
    }
}
