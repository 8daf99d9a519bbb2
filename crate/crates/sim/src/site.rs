//! Single-site jump-diffusion integrator in chamber coordinates.
//!
//! A state `x = g y` is stored as a point `y` of the closed fundamental
//! chamber and a group label `g`. The diffusion with drift
//! `mu = b + 2 sum k a / <a,y>` moves `y`; jumps `x -> s_a x` act on the
//! label by right multiplication `g -> g s_b` with rate `lambda_b(y)`.
//! Near a wall (distance below `eps_hyp`) the normal coordinate takes a
//! square-root Bessel step and the label on that wall is fully mixed.

use std::sync::Arc;

use dunkl_core::drift::DriftKind;
use dunkl_core::linalg::dot_f64;
use dunkl_core::{DriftSpec, GroupTable, RootSystem};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{JumpMode, SimConfig};

/// Equivariant site interaction: adds `a u(y)` to the output.
pub type SiteFactor = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

#[derive(Clone)]
enum Field {
    Linear(f64),
    General(DriftSpec),
}

/// Immutable per-site dynamics: roots, multiplicities, group table, drift.
#[derive(Clone)]
pub struct SiteModel {
    n: usize,
    m: usize,
    roots: Vec<f64>,
    k: Vec<f64>,
    table: GroupTable,
    field: Field,
    factor: Option<SiteFactor>,
}

/// Group component of a state.
#[derive(Clone, Debug, PartialEq)]
pub enum Label {
    Sampled(usize),
    /// Probability vector over group elements.
    Averaged(Vec<f64>),
}

/// One site of one batch member. Several labels may share the same
/// chamber path (states started at `h x0` for different `h`).
#[derive(Clone, Debug)]
pub struct SiteState {
    pub y: Vec<f64>,
    pub labels: Vec<Label>,
    /// Interaction amplitude, frozen over a coarse step.
    pub amplitude: f64,
    pub flagged: bool,
    /// Initial points `h x0` per label, kept until the first step.
    origin: Option<Vec<Vec<f64>>>,
    b: Vec<f64>,
    ell: Vec<f64>,
    rates: Vec<f64>,
    layer: Vec<bool>,
    fresh: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub substeps: u64,
    pub layer_steps: u64,
    pub wall_crossings: u64,
    pub negative_rates: u64,
    pub flagged: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, o: &Diagnostics) {
        self.substeps += o.substeps;
        self.layer_steps += o.layer_steps;
        self.wall_crossings += o.wall_crossings;
        self.negative_rates += o.negative_rates;
        self.flagged += o.flagged;
    }
}

/// Reusable buffers for one site integrator.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    mu: Vec<f64>,
    ynew: Vec<f64>,
    dw: Vec<f64>,
    u: Vec<f64>,
    rates0: Vec<f64>,
    layer0: Vec<bool>,
    crossed: Vec<bool>,
    p: Vec<f64>,
}

impl SiteModel {
    pub fn new(rs: &RootSystem<f64>, drift: DriftSpec, factor: Option<SiteFactor>) -> Self {
        let n = rs.dim();
        let roots: Vec<f64> = rs.positive_roots().iter().flat_map(|p| p.root.normalized_f64()).collect();
        let k = rs.positive_roots().iter().map(|p| p.k).collect();
        let field = match drift.kind() {
            DriftKind::Linear { .. } => Field::Linear(drift.linear_c().expect("linear")),
            _ => Field::General(drift),
        };
        Self { n, m: rs.positive_roots().len(), roots, k, table: GroupTable::new(rs), field, factor }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &GroupTable {
        &self.table
    }

    pub fn n_roots(&self) -> usize {
        self.m
    }

    pub fn root(&self, b: usize) -> &[f64] {
        &self.roots[b * self.n..(b + 1) * self.n]
    }

    pub fn k(&self, b: usize) -> f64 {
        self.k[b]
    }

    /// Group index of the reflection `s_b`.
    pub fn reflection_index(&self, b: usize) -> usize {
        self.table.right_reflect[self.table.identity][b]
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            mu: vec![0.0; self.n],
            ynew: vec![0.0; self.n],
            dw: vec![0.0; self.n],
            u: vec![0.0; self.m],
            rates0: vec![0.0; self.m],
            layer0: vec![false; self.m],
            crossed: vec![false; self.m],
            p: vec![0.0; self.table.len()],
        }
    }

    /// Splits `x = g y` with `y` in the closed chamber.
    pub fn fold(&self, x: &[f64]) -> (Vec<f64>, usize) {
        let mut y = x.to_vec();
        let mut g = self.table.identity;
        for _ in 0..1000 {
            match self.most_negative(&y) {
                Some(b) => {
                    self.reflect_in_place(b, &mut y);
                    g = self.table.right_reflect[g][b];
                }
                None => break,
            }
        }
        (y, g)
    }

    fn most_negative(&self, y: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut worst = 0.0;
        for b in 0..self.m {
            let v = dot_f64(self.root(b), y);
            if v < worst {
                worst = v;
                best = Some(b);
            }
        }
        best
    }

    fn reflect_in_place(&self, b: usize, y: &mut [f64]) {
        let a = &self.roots[b * self.n..(b + 1) * self.n];
        let s = dot_f64(a, y);
        for (yi, ai) in y.iter_mut().zip(a) {
            *yi -= s * ai;
        }
    }

    /// State started at `h x0` for each left multiplier `h` in `lefts`.
    pub fn init_state(&self, x0: &[f64], lefts: &[usize], mode: JumpMode) -> SiteState {
        let (y, g0) = self.fold(x0);
        let g_len = self.table.len();
        let origin = lefts
            .iter()
            .map(|&h| {
                if h == self.table.identity {
                    x0.to_vec()
                } else {
                    let mut p = vec![0.0; self.n];
                    self.table.apply(h, x0, &mut p);
                    p
                }
            })
            .collect();
        let labels = lefts
            .iter()
            .map(|&h| {
                let g = self.table.compose[h][g0];
                match mode {
                    JumpMode::Sampled => Label::Sampled(g),
                    JumpMode::Averaged => {
                        let mut p = vec![0.0; g_len];
                        p[g] = 1.0;
                        Label::Averaged(p)
                    }
                }
            })
            .collect();
        SiteState {
            y,
            labels,
            amplitude: 0.0,
            flagged: false,
            origin: Some(origin),
            b: vec![0.0; self.n],
            ell: vec![0.0; self.m],
            rates: vec![0.0; self.m],
            layer: vec![false; self.m],
            fresh: false,
        }
    }

    /// `b(y) + a u(y)`.
    pub fn field(&self, y: &[f64], amplitude: f64, out: &mut [f64]) {
        match &self.field {
            Field::Linear(c) => {
                for (o, yi) in out.iter_mut().zip(y) {
                    *o = -c * yi;
                }
            }
            Field::General(d) => d.eval(y, out),
        }
        if amplitude != 0.0 {
            if let Some(u) = &self.factor {
                u(y, amplitude, out);
            }
        }
    }

    /// Refreshes the cached field, pairings, layer flags and rates at `s.y`.
    fn refresh(&self, s: &mut SiteState, eps_hyp: f64, diag: &mut Diagnostics) {
        self.field(&s.y, s.amplitude, &mut s.b);
        let thresh = eps_hyp * std::f64::consts::SQRT_2;
        for b in 0..self.m {
            let a = &self.roots[b * self.n..(b + 1) * self.n];
            let ell = dot_f64(a, &s.y);
            s.ell[b] = ell;
            s.layer[b] = self.k[b] > 0.0 && ell < thresh;
            s.rates[b] = if self.k[b] > 0.0 && !s.layer[b] {
                let r = self.k[b] * (2.0 / (ell * ell) - dot_f64(a, &s.b) / ell);
                if r < 0.0 {
                    diag.negative_rates += 1;
                    0.0
                } else {
                    r
                }
            } else {
                0.0
            };
        }
        s.fresh = true;
    }

    /// Value of `f` at the state carried by `label`.
    pub fn label_value(&self, y: &[f64], label: &Label, f: &dyn Fn(&[f64]) -> f64, gy: &mut [f64]) -> f64 {
        match label {
            Label::Sampled(g) => {
                self.table.apply(*g, y, gy);
                f(gy)
            }
            Label::Averaged(p) => {
                let mut num = 0.0;
                let mut den = 0.0;
                for (g, &w) in p.iter().enumerate() {
                    den += w;
                    if w != 0.0 {
                        self.table.apply(g, y, gy);
                        num += w * f(gy);
                    }
                }
                num / den
            }
        }
    }

    /// Value of `f` at the state of label `i`; exact before the first step.
    pub fn value(&self, s: &SiteState, i: usize, f: &dyn Fn(&[f64]) -> f64, gy: &mut [f64]) -> f64 {
        match &s.origin {
            Some(o) => f(&o[i]),
            None => self.label_value(&s.y, &s.labels[i], f, gy),
        }
    }

    /// Advances all states of one site over `h_total`, sharing the substep
    /// grid and the noise among them.
    pub fn advance<R: Rng>(&self, states: &mut [SiteState], h_total: f64, cfg: &SimConfig, rng: &mut R, sc: &mut Scratch, diag: &mut Diagnostics) {
        for s in states.iter_mut() {
            s.fresh = false;
            s.origin = None;
        }
        let mut remaining = h_total;
        let mut count = 0usize;
        while remaining > 0.0 {
            let mut h = remaining;
            for s in states.iter_mut().filter(|s| !s.flagged) {
                if !s.fresh {
                    self.refresh(s, cfg.eps_hyp, diag);
                }
                let lam: f64 = s.rates.iter().sum();
                if lam > 0.0 {
                    h = h.min(cfg.p_max / lam);
                }
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            count += 1;
            if count > cfg.max_substeps {
                for s in states.iter_mut().filter(|s| !s.flagged) {
                    s.flagged = true;
                    diag.flagged += 1;
                }
                return;
            }
            let sd = (2.0 * h).sqrt();
            for d in sc.dw.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *d = sd * z;
            }
            if cfg.jump_mode == JumpMode::Sampled {
                for u in sc.u.iter_mut() {
                    *u = rng.random::<f64>();
                }
            }
            for s in states.iter_mut().filter(|s| !s.flagged) {
                self.step(s, h, cfg, sc, diag);
            }
            diag.substeps += 1;
            remaining = if last { 0.0 } else { remaining - h };
        }
    }

    fn step(&self, s: &mut SiteState, h: f64, cfg: &SimConfig, sc: &mut Scratch, diag: &mut Diagnostics) {
        let n = self.n;
        sc.mu.copy_from_slice(&s.b);
        for b in 0..self.m {
            if self.k[b] > 0.0 && !s.layer[b] {
                let a = &self.roots[b * n..(b + 1) * n];
                let c = 2.0 * self.k[b] / s.ell[b];
                for (mi, ai) in sc.mu.iter_mut().zip(a) {
                    *mi += c * ai;
                }
            }
        }
        let disp = dot_f64(&sc.mu, &sc.mu).sqrt() * h;
        let tame = if disp > cfg.delta_max { cfg.delta_max / disp } else { 1.0 };
        for i in 0..n {
            sc.ynew[i] = s.y[i] + tame * sc.mu[i] * h + sc.dw[i];
        }
        for b in 0..self.m {
            if s.layer[b] {
                diag.layer_steps += 1;
                let a = &self.roots[b * n..(b + 1) * n];
                let npre = dot_f64(a, &sc.ynew) / std::f64::consts::SQRT_2;
                let nn = (npre * npre + 4.0 * self.k[b] * h).sqrt();
                let shift = (nn - npre) / std::f64::consts::SQRT_2;
                for (yi, ai) in sc.ynew.iter_mut().zip(a) {
                    *yi += shift * ai;
                }
            }
        }
        sc.crossed.iter_mut().for_each(|c| *c = false);
        for _ in 0..64 {
            let Some(b) = self.most_negative(&sc.ynew) else { break };
            self.reflect_in_place(b, &mut sc.ynew);
            sc.crossed[b] = true;
            diag.wall_crossings += 1;
            for label in s.labels.iter_mut() {
                match label {
                    Label::Sampled(g) => *g = self.table.right_reflect[*g][b],
                    Label::Averaged(p) => {
                        sc.p.copy_from_slice(p);
                        for (g, &w) in sc.p.iter().enumerate() {
                            p[self.table.right_reflect[g][b]] = w;
                        }
                    }
                }
            }
        }
        sc.rates0.copy_from_slice(&s.rates);
        sc.layer0.copy_from_slice(&s.layer);
        s.y.copy_from_slice(&sc.ynew);
        self.refresh(s, cfg.eps_hyp, diag);
        for b in 0..self.m {
            if self.k[b] == 0.0 {
                continue;
            }
            let q = if sc.layer0[b] || s.layer[b] || sc.crossed[b] {
                0.5
            } else {
                let lam = 0.5 * h * (sc.rates0[b] + s.rates[b]);
                -0.5 * (-2.0 * lam).exp_m1()
            };
            if q == 0.0 {
                continue;
            }
            for label in s.labels.iter_mut() {
                match label {
                    Label::Sampled(g) => {
                        if sc.u[b] < q {
                            *g = self.table.right_reflect[*g][b];
                        }
                    }
                    Label::Averaged(p) => {
                        sc.p.copy_from_slice(p);
                        for (g, w) in p.iter_mut().enumerate() {
                            *w = (1.0 - q) * sc.p[g] + q * sc.p[self.table.right_reflect[g][b]];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dunkl_core::{ratio, Family};
    use rand::SeedableRng;

    fn a1(k: i64, d: i64) -> SiteModel {
        let rs = RootSystem::<f64>::build_standard(Family::A, 1, &[ratio(k, d)]).unwrap();
        SiteModel::new(&rs, DriftSpec::linear(ratio(1, 1)), None)
    }

    #[test]
    fn fold_reconstructs_the_point() {
        let rs = RootSystem::<f64>::build_standard(Family::A, 2, &[ratio(1, 3)]).unwrap();
        let m = SiteModel::new(&rs, DriftSpec::linear(ratio(1, 1)), None);
        let x = [0.3, -1.2, 2.5];
        let (y, g) = m.fold(&x);
        for b in 0..m.n_roots() {
            assert!(dot_f64(m.root(b), &y) >= 0.0);
        }
        let mut gy = vec![0.0; 3];
        m.table().apply(g, &y, &mut gy);
        for (u, v) in gy.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn averaged_labels_stay_normalised_and_chamber_is_kept() {
        let m = a1(1, 4);
        let cfg = SimConfig::default();
        let mut st = vec![m.init_state(&[0.05], &[0, 1], JumpMode::Averaged)];
        let mut rng = rand::rngs::SmallRng::seed_from_u64(3);
        let mut sc = m.scratch();
        let mut diag = Diagnostics::default();
        for _ in 0..200 {
            m.advance(&mut st, 1e-3, &cfg, &mut rng, &mut sc, &mut diag);
            assert!(st[0].y[0] >= 0.0);
            for l in &st[0].labels {
                let Label::Averaged(p) = l else { unreachable!() };
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(p.iter().all(|w| *w >= 0.0));
            }
        }
        assert!(diag.substeps >= 200);
        assert_eq!(diag.negative_rates, 0);
    }

    #[test]
    fn zero_multiplicity_crossing_is_deterministic() {
        let m = a1(0, 1);
        let cfg = SimConfig { jump_mode: JumpMode::Sampled, ..SimConfig::default() };
        let mut st = vec![m.init_state(&[1e-4], &[0], JumpMode::Sampled)];
        let mut rng = rand::rngs::SmallRng::seed_from_u64(11);
        let mut sc = m.scratch();
        let mut diag = Diagnostics::default();
        let mut gy = [0.0];
        let before = st[0].y[0];
        m.advance(&mut st, 1e-3, &cfg, &mut rng, &mut sc, &mut diag);
        // the signed position equals the free Euler update
        let x = m.label_value(&st[0].y, &st[0].labels[0], &|x| x[0], &mut gy);
        assert!((x - (before * (1.0 - 1e-3) + sc.dw[0])).abs() < 1e-15);
    }
}
