//! Monte Carlo estimators for the single-site semigroup `P_t = exp(tL)`,
//! `L = Delta_k + b . grad_k`, and the verifiers built on them.

use dunkl_core::calculus::{eta_constant, symmetrised_gradient, DunklOps};
use dunkl_core::drift::radial_contraction;
use dunkl_core::linalg::dot_f64;
use dunkl_core::observable::Observable;
use dunkl_core::poly::MultiPoly;
use dunkl_core::probes::ball_points;
use dunkl_core::quadrature::{gaussian_weighted_integral, gaussian_weighted_mean};
use dunkl_core::{DriftSpec, RootSystem};
use serde::Serialize;

use crate::config::{JumpMode, SimConfig};
use crate::error::{Result, SimError};
use crate::lyapunov::{l_rho, rho, LyapunovSpec};
use crate::runner::{Batch, BatchOutput, SiteInit, WindowStates};
use crate::site::SiteModel;
use crate::stats::{mean_cov, mean_se, pairwise_sum};

/// Monte Carlo estimate of `P_t f(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_replicas: usize,
    pub n_flagged: usize,
    pub t: f64,
    pub x0: Vec<f64>,
    pub unreliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientEstimate {
    pub t: f64,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub warning: Option<String>,
}

/// One `(x, t)` evaluation of `Gt(P_t f)(x) <= exp(2 eta t) P_t(Gt f)(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientBoundPoint {
    pub x: Vec<f64>,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of `lhs - rhs` (paired, delta method).
    pub std_error: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientBoundReport {
    pub eta: f64,
    pub gamma: f64,
    /// `eta < 0`: the bound gives exponential decay.
    pub coercive: bool,
    pub points: Vec<GradientBoundPoint>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub c1: f64,
    pub c2: f64,
    /// `sup <x, b(x)>/|x|^2` over the probes.
    pub contraction: f64,
    pub witness: Vec<f64>,
    pub n_probes: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessPoint {
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureCheck {
    pub f: String,
    pub integral: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub f: String,
    pub reference: Option<f64>,
    pub long_run: f64,
    pub long_run_se: f64,
    pub time_average: f64,
    /// Standard error of the paired difference time average minus long run.
    pub difference_se: f64,
    pub pass_long_run: bool,
    pub pass_time_average: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub c: f64,
    pub quadrature: Vec<QuadratureCheck>,
    pub moments: Vec<MomentCheck>,
    pub unreliable: bool,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvariantOptions {
    pub t_burn: f64,
    pub t_long: f64,
    /// Sampling interval of the time average.
    pub ds: f64,
    pub quadrature_tol: f64,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        Self { t_burn: 10.0, t_long: 16.0, ds: 0.05, quadrature_tol: 1e-10 }
    }
}

/// Statistical acceptance threshold in standard errors.
pub const N_SIGMA: f64 = 3.0;

pub struct FdEngine {
    rs: RootSystem<f64>,
    drift: DriftSpec,
    model: SiteModel,
    cfg: SimConfig,
    code: u64,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::Config("checkpoint times must be nonnegative and strictly increasing".into()));
    }
    Ok(())
}

fn check_point(rs: &RootSystem<f64>, x: &[f64]) -> Result<()> {
    if x.len() != rs.dim() {
        return Err(dunkl_core::CoreError::DimensionMismatch { expected: rs.dim(), got: x.len() }.into());
    }
    Ok(())
}

impl FdEngine {
    pub fn new(rs: &RootSystem<f64>, drift: DriftSpec, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let model = SiteModel::new(rs, drift.clone(), None);
        Ok(Self { rs: rs.clone(), drift, model, cfg, code: 0 })
    }

    /// Uses the random stream of another lattice site code.
    pub fn with_stream(mut self, code: u64) -> Self {
        self.code = code;
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn system(&self) -> &RootSystem<f64> {
        &self.rs
    }

    pub fn drift(&self) -> &DriftSpec {
        &self.drift
    }

    pub fn model(&self) -> &SiteModel {
        &self.model
    }

    pub fn with_config(&self, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { rs: self.rs.clone(), drift: self.drift.clone(), model: self.model.clone(), cfg, code: self.code })
    }

    /// `eta` from the drift bounds.
    pub fn eta(&self) -> Result<f64> {
        Ok(eta_constant(&self.drift.bounds::<f64>()?, self.rs.dim(), self.rs.gamma())?)
    }

    fn run(&self, init: &[Vec<SiteInit>], times: &[f64], eval: impl Fn(usize, &WindowStates, &mut Vec<f64>) + Sync) -> BatchOutput {
        let codes = [self.code];
        Batch { model: &self.model, cfg: &self.cfg, codes: &codes, init, coupling: None, times }.run(eval)
    }

    /// Estimates `P_t f_j(x)` for every checkpoint; result indexed `[time][f]`.
    pub fn estimate_many(&self, fs: &[&dyn Observable], x: &[f64], times: &[f64]) -> Result<Vec<Vec<EnsembleEstimate>>> {
        check_times(times)?;
        check_point(&self.rs, x)?;
        let id = self.model.table().identity;
        let init = vec![vec![SiteInit { x0: x.to_vec(), lefts: vec![id] }]];
        let model = &self.model;
        let out = self.run(&init, times, |_, st, row| {
            let s = &st[0][0];
            let mut gy = vec![0.0; s.y.len()];
            for f in fs {
                row.push(model.value(s, 0, &|z| f.eval(z), &mut gy));
            }
        });
        let nf = fs.len();
        Ok(times
            .iter()
            .enumerate()
            .map(|(ti, &t)| {
                (0..nf)
                    .map(|j| {
                        let (mean, se) = mean_se(&out.column(ti * nf + j));
                        EnsembleEstimate { mean, std_error: se, n_replicas: out.rows.len(), n_flagged: out.n_flagged, t, x0: x.to_vec(), unreliable: out.unreliable() }
                    })
                    .collect()
            })
            .collect())
    }

    pub fn estimate_pt(&self, f: &dyn Observable, x: &[f64], t: f64) -> Result<EnsembleEstimate> {
        Ok(self.estimate_many(&[f], x, &[t])?.remove(0).remove(0))
    }

    pub fn estimate_pt_path(&self, f: &dyn Observable, x: &[f64], times: &[f64]) -> Result<Vec<EnsembleEstimate>> {
        Ok(self.estimate_many(&[f], x, times)?.into_iter().map(|mut v| v.remove(0)).collect())
    }

    /// Coupled batch for Dunkl gradients of `P_t(f o g)` at `x` for each `g`
    /// in `gs`. Row layout per checkpoint: `|gs| * N` gradient components,
    /// then `Gt f` at the centre state.
    fn gradient_batch(&self, f: &dyn Observable, x: &[f64], times: &[f64], h: f64, gs: &[usize]) -> Result<BatchOutput> {
        check_times(times)?;
        check_point(&self.rs, x)?;
        if !(h > 0.0) {
            return Err(SimError::Config("finite-difference step must be positive".into()));
        }
        let n = self.rs.dim();
        let model = &self.model;
        let table = model.table();
        let active: Vec<usize> = (0..model.n_roots()).filter(|&b| model.k(b) > 0.0).collect();
        let mut pairings = Vec::new();
        for &b in &active {
            let ell = dot_f64(model.root(b), x);
            if ell.abs() < 1e-9 {
                return Err(SimError::Config(format!("gradient point {x:?} lies on a reflecting hyperplane")));
            }
            pairings.push(ell);
        }
        let mut lefts = vec![table.identity];
        lefts.extend(active.iter().map(|&b| model.reflection_index(b)));
        let mut init = vec![vec![SiteInit { x0: x.to_vec(), lefts }]];
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut xp = x.to_vec();
                xp[i] += s * h;
                init.push(vec![SiteInit { x0: xp, lefts: vec![table.identity] }]);
            }
        }
        let rs = &self.rs;
        Ok(self.run(&init, times, |_, st, row| {
            let mut gy = vec![0.0; n];
            let mut tmp = vec![0.0; n];
            for &g in gs {
                let fg = |z: &[f64]| {
                    let mut w = vec![0.0; n];
                    table.apply(g, z, &mut w);
                    f.eval(&w)
                };
                let c = &st[0][0];
                let vc = model.value(c, 0, &fg, &mut gy);
                for i in 0..n {
                    let p = &st[0][1 + 2 * i];
                    let m = &st[0][2 + 2 * i];
                    tmp[i] = (model.value(p, 0, &fg, &mut gy) - model.value(m, 0, &fg, &mut gy)) / (2.0 * h);
                }
                for (j, &b) in active.iter().enumerate() {
                    let vr = model.value(c, 1 + j, &fg, &mut gy);
                    let d = model.k(b) * (vc - vr) / pairings[j];
                    for (ti, ai) in tmp.iter_mut().zip(model.root(b)) {
                        *ti += d * ai;
                    }
                }
                row.extend_from_slice(&tmp);
            }
            row.push(symmetrised_gradient(rs, f, &st[0][0].y));
        }))
    }

    /// `grad_k (P_t f)(x)` by common-random-number central differences.
    pub fn estimate_dunkl_gradient_pt(&self, f: &dyn Observable, x: &[f64], t: f64, h: f64) -> Result<GradientEstimate> {
        let out = self.gradient_batch(f, x, &[t], h, &[self.model.table().identity])?;
        let n = self.rs.dim();
        let (mean, se): (Vec<f64>, Vec<f64>) = (0..n).map(|i| mean_se(&out.column(i))).unzip();
        let noisy = mean.iter().zip(&se).any(|(m, s)| *s > 0.5 * m.abs() && *s > 1e-3);
        let warning = noisy.then(|| format!("difference noise dominates at h = {h:e}; try h = {:e}", 10.0 * h));
        Ok(GradientEstimate { t, x: x.to_vec(), mean, std_error: se, warning })
    }

    /// Paired check of the symmetrised gradient bound at one point.
    pub fn gradient_bound_at(&self, f: &dyn Observable, x: &[f64], times: &[f64], h: f64, eta: f64, fd_tol: f64) -> Result<Vec<GradientBoundPoint>> {
        let all: Vec<usize> = (0..self.model.table().len()).collect();
        let out = self.gradient_batch(f, x, times, h, &all)?;
        let width = all.len() * self.rs.dim() + 1;
        let nrep = out.rows.len() as f64;
        let mut points = Vec::new();
        for (ti, &t) in times.iter().enumerate() {
            let rows: Vec<Vec<f64>> = out.rows.iter().map(|r| r[ti * width..(ti + 1) * width].to_vec()).collect();
            let (means, cov) = mean_cov(&rows);
            let nz = width - 1;
            let trace: f64 = (0..nz).map(|i| cov[i][i]).sum();
            let lhs = means[..nz].iter().map(|v| v * v).sum::<f64>() - trace;
            let e = (2.0 * eta * t).exp();
            let rhs = e * means[nz];
            let lin: Vec<f64> = rows.iter().map(|r| 2.0 * dot_f64(&means[..nz], &r[..nz]) - e * r[nz]).collect();
            let (_, se_lin) = mean_se(&lin);
            let se = if nrep > 1.0 { se_lin } else { 0.0 };
            let margin = rhs - lhs;
            let tol = fd_tol * rhs.abs().max(1.0);
            points.push(GradientBoundPoint { x: x.to_vec(), t, lhs, rhs, std_error: se, margin, pass: -margin <= N_SIGMA * se + tol });
        }
        Ok(points)
    }

    pub fn verify_gradient_bound(&self, f: &dyn Observable, probes: &[Vec<f64>], times: &[f64], h: f64) -> Result<GradientBoundReport> {
        let eta = self.eta()?;
        let mut points = Vec::new();
        for x in probes {
            points.extend(self.gradient_bound_at(f, x, times, h, eta, 1e-4)?);
        }
        let pass = points.iter().all(|p| p.pass);
        Ok(GradientBoundReport { eta, gamma: *self.rs.gamma(), coercive: eta < 0.0, points, pass })
    }

    /// Running estimate of `E rho(X_t)` against `rho(x0) + C1/C2`.
    pub fn lyapunov_boundedness(&self, lyap: &LyapunovReport, x0: &[f64], times: &[f64]) -> Result<Vec<BoundednessPoint>> {
        let f = dunkl_core::observable::FnObservable::new("rho", rho);
        let est = self.estimate_pt_path(&f, x0, times)?;
        let bound = rho(x0) + lyap.c1 / lyap.c2;
        Ok(est
            .into_iter()
            .map(|e| BoundednessPoint { t: e.t, estimate: e.mean, std_error: e.std_error, bound, pass: e.mean <= bound + N_SIGMA * e.std_error })
            .collect())
    }
}

/// Unit directions used with the radial grid: coordinate axes, their
/// negatives and quasi-random points of the sphere.
fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    for p in ball_points(n, count, 1.0) {
        let r = dot_f64(&p, &p).sqrt();
        if r > 1e-3 {
            out.push(p.iter().map(|v| v / r).collect());
        }
    }
    out
}

/// Fits the smallest `C1` with `L rho <= C1 - C2 rho` on a radial grid
/// `[0, r_max]` times a set of directions, plus `extra` probes.
pub fn verify_lyapunov(rs: &RootSystem<f64>, drift: &DriftSpec, spec: &LyapunovSpec, extra: &[Vec<f64>]) -> Result<LyapunovReport> {
    if !(spec.c2 > 0.0) || spec.n_radii < 2 {
        return Err(SimError::Config("Lyapunov spec needs c2 > 0 and at least two radii".into()));
    }
    let n = rs.dim();
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for u in directions(n, 32) {
        for i in 0..spec.n_radii {
            let r = spec.r_max * i as f64 / (spec.n_radii - 1) as f64;
            probes.push(u.iter().map(|v| v * r).collect());
        }
    }
    probes.extend(extra.iter().cloned());
    let (contraction, witness) = radial_contraction(drift, &probes);
    if !(contraction < 0.0) {
        return Err(SimError::Audit { condition: "<x, b(x)>/|x|^2 <= -C with C > 0".into(), witness, value: contraction });
    }
    let gamma = *rs.gamma();
    let mut c1 = f64::NEG_INFINITY;
    let mut b = vec![0.0; n];
    for x in &probes {
        drift.eval(x, &mut b);
        c1 = c1.max(l_rho(x, &b, gamma) + spec.c2 * rho(x));
    }
    let c1 = c1.max(0.0);
    let pass = c1.is_finite();
    Ok(LyapunovReport { c1, c2: spec.c2, contraction, witness, n_probes: probes.len(), pass })
}

/// Checks that `exp(-c|x|^2/2) dmu_k` is invariant for the linear drift:
/// quadrature of `int L f dnu` (N <= 2), long-run moments and time averages.
pub fn verify_invariant_measure(engine: &FdEngine, polys: &[MultiPoly<f64>], x0: &[f64], opts: &InvariantOptions) -> Result<InvariantReport> {
    // Group averaging leaves only the deterministic transient of odd moments,
    // which a 3-sigma test with near-zero errors would resolve.
    let engine = &engine.with_config(SimConfig { jump_mode: JumpMode::Sampled, ..engine.config().clone() })?;
    let rs = engine.system();
    let c = engine.drift().linear_c().ok_or_else(|| SimError::Config("invariant-measure check needs a linear drift".into()))?;
    let n = rs.dim();
    let ops = DunklOps::new(rs);
    let b = engine.drift().field_poly::<f64>(n).expect("linear drift is polynomial");
    let mut quadrature = Vec::new();
    let mut references = Vec::new();
    for p in polys {
        if p.n_vars() != n {
            return Err(dunkl_core::CoreError::DimensionMismatch { expected: n, got: p.n_vars() }.into());
        }
        if n <= 2 {
            let lf = ops.generator(&b, p)?;
            let z = gaussian_weighted_integral(rs, c, &|_x: &[f64]| 1.0, opts.quadrature_tol)?.value;
            let integral = gaussian_weighted_integral(rs, c, &|x: &[f64]| lf.eval_f64(x), opts.quadrature_tol)?.value / z;
            // L2(nu) norm of Lf: smooth integrand, unlike |Lf|.
            let scale = (gaussian_weighted_integral(rs, c, &|x: &[f64]| lf.eval_f64(x).powi(2), opts.quadrature_tol)?.value / z).sqrt().max(1.0);
            quadrature.push(QuadratureCheck { f: p.to_string(), integral, scale, pass: integral.abs() <= 1e-6 * scale });
            references.push(Some(gaussian_weighted_mean(rs, c, &|x: &[f64]| p.eval_f64(x), opts.quadrature_tol)?));
        } else {
            references.push(radial_second_moment(p, n, *rs.gamma(), c));
        }
    }
    let mut times = Vec::new();
    let mut t = opts.t_burn;
    while t < opts.t_long - 1e-9 {
        times.push(t);
        t += opts.ds;
    }
    times.push(opts.t_long);
    let obs: Vec<dunkl_core::observable::PolyObservable> = polys.iter().map(dunkl_core::observable::PolyObservable::new).collect();
    let refs: Vec<&dyn Observable> = obs.iter().map(|o| o as &dyn Observable).collect();
    let id = engine.model().table().identity;
    let init = vec![vec![SiteInit { x0: x0.to_vec(), lefts: vec![id] }]];
    let model = engine.model();
    let nf = refs.len();
    let out = engine.run(&init, &times, |_, st, row| {
        let s = &st[0][0];
        let mut gy = vec![0.0; n];
        for f in &refs {
            row.push(model.value(s, 0, &|z| f.eval(z), &mut gy));
        }
    });
    let nt = times.len();
    let mut moments = Vec::new();
    for (j, p) in polys.iter().enumerate() {
        let long = out.column((nt - 1) * nf + j);
        let ta: Vec<f64> = out.rows.iter().map(|r| pairwise_sum(&(0..nt).map(|ti| r[ti * nf + j]).collect::<Vec<_>>()) / nt as f64).collect();
        let (lm, lse) = mean_se(&long);
        let (tm, _) = mean_se(&ta);
        let diff: Vec<f64> = ta.iter().zip(&long).map(|(a, b)| a - b).collect();
        let (dm, dse) = mean_se(&diff);
        let pass_long_run = references[j].is_none_or(|r| (lm - r).abs() <= N_SIGMA * lse);
        moments.push(MomentCheck {
            f: p.to_string(),
            reference: references[j],
            long_run: lm,
            long_run_se: lse,
            time_average: tm,
            difference_se: dse,
            pass_long_run,
            pass_time_average: dm.abs() <= N_SIGMA * dse,
        });
    }
    let unreliable = out.unreliable();
    let pass = !unreliable && quadrature.iter().all(|q| q.pass) && moments.iter().all(|m| m.pass_long_run && m.pass_time_average);
    Ok(InvariantReport { c, quadrature, moments, unreliable, pass })
}

/// `E|x|^2 = (N + 2 gamma)/c` under the Gaussian-damped Dunkl measure.
fn radial_second_moment(p: &MultiPoly<f64>, n: usize, gamma: f64, c: f64) -> Option<f64> {
    let mut r2 = MultiPoly::<f64>::zero(n);
    for i in 0..n {
        let xi = MultiPoly::var(i, n).ok()?;
        r2 = r2.add(&xi.mul(&xi).ok()?);
    }
    p.sub(&r2).is_zero().then_some((n as f64 + 2.0 * gamma) / c)
}
