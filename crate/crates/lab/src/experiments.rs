//! One runner per subcommand. Each returns an [`Outcome`] or an error whose
//! exit code distinguishes schema violations from failed audits.

use dunkl_core::calculus::{eta_constant, GeneratorDecomposition};
use dunkl_core::drift::{audit_equivariance, audit_gamma_condition};
use dunkl_core::identities::{multiplicity_label, run_identity_suite, IdentityReport, SuiteOptions};
use dunkl_core::observable::{FnObservable, Observable};
use dunkl_core::probes::default_probes;
use dunkl_core::{DriftSpec, Rational, RootSystem, Scalar};
use dunkl_sim::fd::{verify_invariant_measure, verify_lyapunov, InvariantOptions, N_SIGMA};
use dunkl_sim::lattice::{
    audit_lattice, cauchy_convergence_test, compute_constants, ergodicity_test, finite_speed_test, simulate_window, CauchyOptions, FiniteSpeedOptions, LatticeSpec,
    PropagationConstants,
};
use dunkl_sim::{FdEngine, SimConfig, Verdict};
use serde_json::{json, Value};

use crate::config::*;
use crate::error::{LabError, Result};
use crate::report::{fmt_site, Hypothesis, Outcome, ResultRow, Status};

/// Number of probe points for the drift audits.
const AUDIT_PROBES: usize = 1000;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn with_seed(mut sim: SimConfig, seed: Option<u64>) -> SimConfig {
    if let Some(s) = seed {
        sim.seed = s;
    }
    sim
}

fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Pass => {}
        }
    }
    out
}

fn from_checks(rows: &[ResultRow]) -> Verdict {
    if rows.iter().any(|r| r.pass == Some(false)) {
        Verdict::Fail
    } else {
        Verdict::Pass
    }
}

/// Site-level checklist. Failures of the rate or equivariance conditions
/// abort the run.
fn single_site_hypotheses(rs: &RootSystem<f64>, drift: &DriftSpec) -> Result<(Vec<Hypothesis>, f64)> {
    let probes = default_probes(rs, AUDIT_PROBES);
    audit_gamma_condition(rs, drift, &probes)?;
    audit_equivariance(rs, drift, &probes)?;
    let gamma = *rs.gamma();
    let eta = eta_constant(&drift.bounds::<f64>()?, rs.dim(), &gamma)?;
    let hyps = vec![
        Hypothesis::new("gamma_condition", Status::Pass, format!("jump rates nonnegative on {} probes", probes.len())),
        Hypothesis::new("g_condition", Status::Pass, format!("b(gx) = g b(x) on {} probes", probes.len())),
        Hypothesis::new("eta_sign", if eta < 0.0 { Status::Pass } else { Status::Warn }, format!("eta = {eta}")),
        Hypothesis::new("gamma_below_half", if gamma < 0.5 { Status::Pass } else { Status::Warn }, format!("gamma = {gamma}")),
        Hypothesis::new("zeta_finite", Status::NotApplicable, "single site"),
        Hypothesis::new("eta_tilde_c_tilde", Status::NotApplicable, "single site"),
    ];
    Ok((hyps, eta))
}

fn lattice_hypotheses(spec: &LatticeSpec, consts: &PropagationConstants, audit_probes: usize, seed: u64) -> Result<Vec<Hypothesis>> {
    let (mut hyps, _) = single_site_hypotheses(&spec.rs, &spec.drift)?;
    let audit = audit_lattice(spec, audit_probes, seed)?;
    if !audit.pass {
        return Err(LabError::Audit(format!(
            "hypothesis audit failed: lattice stencil change {}, equivariance residual {}, locality residual {}, minimal rate {}",
            audit.stencil_max_change, audit.equivariance_residual, audit.locality_residual, audit.rate_min
        )));
    }
    hyps.retain(|h| h.item != "zeta_finite" && h.item != "eta_tilde_c_tilde");
    hyps.push(Hypothesis::new(
        "lattice_stencil_equivariance_locality",
        Status::Pass,
        format!("{} probes, minimal rate {}", audit.n_probes, audit.rate_min),
    ));
    hyps.push(match consts.zeta {
        Some(z) => Hypothesis::new("zeta_finite", Status::Pass, format!("zeta = {z}")),
        None => Hypothesis::new("zeta_finite", Status::Warn, "interaction amplitudes are not summable"),
    });
    let status = if consts.ergodic_regime {
        Status::Pass
    } else if consts.available {
        Status::Warn
    } else {
        Status::Fail
    };
    hyps.push(Hypothesis::new(
        "eta_tilde_c_tilde",
        status,
        format!("sup eta_tilde = {}, C_tilde = {}, eps = {}", consts.eta_tilde_sup, consts.c_tilde, consts.eps),
    ));
    Ok(hyps)
}

fn base_row(experiment: &str, rs: &RootSystem<f64>, c: Option<f64>) -> ResultRow {
    ResultRow { experiment: experiment.into(), system: rs.label().into(), k: multiplicity_label(rs), c, ..ResultRow::default() }
}

/// `exp(-t M) x` by scaling and squaring of a Taylor polynomial.
fn expm_apply(m: &[Vec<f64>], t: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let norm: f64 = m.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) * t;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let h = -t / 2f64.powi(squarings as i32);
    let mul = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> { (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect() };
    let a: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| v * h).collect()).collect();
    let mut e: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = e.clone();
    for k in 1..=20 {
        term = mul(&term, &a).into_iter().map(|r| r.into_iter().map(|v| v / k as f64).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                e[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        e = mul(&e, &e);
    }
    (0..n).map(|i| (0..n).map(|j| e[i][j] * x[j]).sum()).collect()
}

/// Closed-form moments under `b = -c x`: `E X_t = exp(-t M) x` with
/// `M = c (I + sum k_a a a^T)` and `E|X_t|^2` relaxing to `(N + 2 gamma)/c`.
pub fn linear_moments(rs: &RootSystem<f64>, c: f64, x: &[f64], t: f64) -> (Vec<f64>, f64) {
    let n = rs.dim();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { c } else { 0.0 }).collect()).collect();
    for p in rs.positive_roots() {
        let a = p.root.normalized_f64();
        for i in 0..n {
            for j in 0..n {
                m[i][j] += c * p.k * a[i] * a[j];
            }
        }
    }
    let first = expm_apply(&m, t, x);
    let m_inf = (n as f64 + 2.0 * rs.gamma()) / c;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (first, m_inf + (r2 - m_inf) * (-2.0 * c * t).exp())
}

fn identity_rows(experiment: &str, reports: &[IdentityReport], c: Option<f64>, tol: f64) -> Vec<ResultRow> {
    reports
        .iter()
        .map(|r| ResultRow {
            experiment: experiment.into(),
            system: r.system.clone(),
            k: r.k.clone(),
            c,
            quantity: r.check.clone(),
            estimate: r.max_abs_residual,
            std_error: Some(0.0),
            bound: Some(if r.exact { 0.0 } else { tol }),
            margin: Some(-r.max_abs_residual),
            pass: Some(r.pass),
            ..ResultRow::default()
        })
        .collect()
}

pub fn calculus_check(cfg: &CalculusConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "calculus-check";
    if cfg.systems.is_empty() || cfg.n_polys == 0 {
        return Err(LabError::Schema("need at least one system and one polynomial".into()));
    }
    let seed = seed.or(cfg.seed).unwrap_or(2024);
    let opts = SuiteOptions { n_polys: cfg.n_polys, max_degree: cfg.max_degree, n_terms: cfg.n_terms, carre_every: cfg.carre_every, seed, float_tol: cfg.float_tol };
    let c = cfg.drift.as_ref().and_then(DriftDesc::linear_c);
    let mut rows = Vec::new();
    let mut details = Vec::new();
    let mut notes = Vec::new();
    let mut hyps = Vec::new();
    for desc in &cfg.systems {
        let rs_f = desc.build::<f64>()?;
        let n = rs_f.dim();
        let drift = cfg.drift.as_ref().map(|d| d.build(n)).transpose()?;
        let reports = match desc.build::<Rational>() {
            Ok(rs) => run_identity_suite(&rs, drift.as_ref(), &opts)?,
            Err(_) => {
                notes.push(format!("{} needs irrational scalars; identities checked in floating point", rs_f.label()));
                run_identity_suite(&rs_f, drift.as_ref(), &opts)?
            }
        };
        rows.extend(identity_rows(NAME, &reports, c, cfg.float_tol));
        let k_label = reports.first().map(|r| r.k.clone()).unwrap_or_else(|| multiplicity_label(&rs_f));
        let base = ResultRow { k: k_label, ..base_row(NAME, &rs_f, c) };
        if let Some(d) = &drift {
            let probes = default_probes(&rs_f, cfg.rate_probes);
            let dec = GeneratorDecomposition::new(&rs_f, d);
            let min_rate = probes.iter().flat_map(|x| dec.jump_rates(x)).fold(f64::INFINITY, f64::min);
            rows.push(ResultRow {
                quantity: "min_jump_rate".into(),
                estimate: min_rate,
                bound: Some(0.0),
                margin: Some(min_rate),
                pass: Some(min_rate >= 0.0),
                ..base.clone()
            });
            let status = if min_rate >= 0.0 { Status::Pass } else { Status::Fail };
            hyps.push(Hypothesis::new("gamma_condition", status, format!("{}: minimal rate {min_rate} on {} probes", rs_f.label(), probes.len())));
            let eta = match desc.build::<Rational>() {
                Ok(rs) => d.bounds::<Rational>().and_then(|b| eta_constant(&b, n, rs.gamma())).map(|e| (e.to_f64(), e.to_string())).ok(),
                Err(_) => d.bounds::<f64>().and_then(|b| eta_constant(&b, n, rs_f.gamma())).map(|e| (e, e.to_string())).ok(),
            };
            if let Some((v, text)) = eta {
                rows.push(ResultRow { quantity: "eta".into(), estimate: v, ..base.clone() });
                details.push(json!({"system": rs_f.label(), "eta": text}));
            }
        }
        details.push(json!({"system": rs_f.label(), "identities": to_value(&reports)}));
    }
    hyps.push(Hypothesis::new("eta_sign", Status::NotApplicable, "reported per system"));
    let verdict = from_checks(&rows);
    Ok(Outcome { verdict, rows, hypotheses: hyps, notes, details: Value::Array(details), tables: vec![], seeds: json!({ "polynomial_seed": seed }) })
}

pub fn fd_sim(cfg: &FdSimConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "fd-sim";
    let rs = cfg.system.build::<f64>()?;
    let n = rs.dim();
    check_points(std::slice::from_ref(&cfg.x0), n)?;
    check_times(&cfg.times, true)?;
    let drift = cfg.drift.build(n)?;
    let (hyps, _) = single_site_hypotheses(&rs, &drift)?;
    let sim = with_seed(cfg.sim.clone(), seed.or(cfg.seed));
    let engine = FdEngine::new(&rs, drift, sim.clone())?;
    let user = parse_observables(&cfg.observables, n)?;
    let c = cfg.drift.linear_c();
    let oracle = c.filter(|_| cfg.moment_oracles);
    let mut fs: Vec<&dyn Observable> = user.iter().map(|f| f.as_ref()).collect();
    let coords: Vec<FnObservable> = (0..n).map(|j| FnObservable::new(format!("x{}", j + 1), move |z: &[f64]| z[j])).collect();
    let sq = FnObservable::new("|x|^2", |z: &[f64]| z.iter().map(|v| v * v).sum());
    if oracle.is_some() {
        fs.extend(coords.iter().map(|f| f as &dyn Observable));
        fs.push(&sq);
    }
    let est = if fs.is_empty() || cfg.times.is_empty() { Vec::new() } else { engine.estimate_many(&fs, &cfg.x0, &cfg.times)? };
    let mut rows = Vec::new();
    let mut unreliable = false;
    for (ti, &t) in cfg.times.iter().enumerate() {
        let exact = oracle.map(|c| linear_moments(&rs, c, &cfg.x0, t));
        for (fi, f) in fs.iter().enumerate() {
            let e = &est[ti][fi];
            unreliable |= e.unreliable;
            let mut row = ResultRow { t: Some(t), x: Some(cfg.x0.clone()), std_error: Some(e.std_error), estimate: e.mean, ..base_row(NAME, &rs, c) };
            match (&exact, fi.checked_sub(user.len())) {
                (Some((first, second)), Some(j)) => {
                    let reference = if j < n { first[j] } else { *second };
                    let margin = N_SIGMA * e.std_error + cfg.bias_tol - (e.mean - reference).abs();
                    row.quantity = format!("E[{}] vs closed form", f.name());
                    row.bound = Some(reference);
                    row.margin = Some(margin);
                    row.pass = Some(margin >= 0.0);
                }
                _ => row.quantity = format!("P_t[{}]", f.name()),
            }
            rows.push(row);
        }
    }
    let mut notes = Vec::new();
    let mut verdict = from_checks(&rows);
    if unreliable {
        notes.push("some replicas were flagged; estimates marked unreliable".into());
        verdict = combine([verdict, Verdict::Inconclusive]);
    }
    Ok(Outcome { verdict, rows, hypotheses: hyps, notes, details: to_value(&est), tables: vec![], seeds: json!({ "sim_seed": sim.seed }) })
}

pub fn gradient_bound(cfg: &GradientConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "gradient-bound";
    let rs = cfg.system.build::<f64>()?;
    let n = rs.dim();
    check_times(&cfg.times, true)?;
    if !(cfg.h > 0.0) || !(cfg.fd_tol >= 0.0) {
        return Err(LabError::Schema("h must be positive and fd_tol nonnegative".into()));
    }
    let drift = cfg.drift.build(n)?;
    let (hyps, eta) = single_site_hypotheses(&rs, &drift)?;
    let sim = with_seed(cfg.sim.clone(), seed.or(cfg.seed));
    let engine = FdEngine::new(&rs, drift, sim.clone())?;
    let probes = cfg.probes.points(&rs)?;
    let fs = parse_observables(&cfg.observables, n)?;
    let c = cfg.drift.linear_c();
    let exploratory = eta >= 0.0;
    let mut notes = Vec::new();
    if exploratory {
        notes.push(format!("outside the coercive regime: eta = {eta} >= 0 (gamma = {}); exploratory run, failures are not conclusive", rs.gamma()));
    }
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for f in &fs {
        for x in &probes {
            for p in engine.gradient_bound_at(f.as_ref(), x, &cfg.times, cfg.h, eta, cfg.fd_tol)? {
                rows.push(ResultRow {
                    t: Some(p.t),
                    x: Some(x.clone()),
                    quantity: format!("gamma_tilde_bound[{}]", f.name()),
                    estimate: p.lhs,
                    std_error: Some(p.std_error),
                    bound: Some(p.rhs),
                    margin: Some(p.margin),
                    pass: Some(p.pass),
                    ..base_row(NAME, &rs, c)
                });
                if p.t == 0.0 {
                    let tol = cfg.fd_tol * p.rhs.abs().max(1.0);
                    rows.push(ResultRow {
                        t: Some(0.0),
                        x: Some(x.clone()),
                        quantity: format!("gamma_tilde_equality_t0[{}]", f.name()),
                        estimate: p.lhs - p.rhs,
                        std_error: Some(p.std_error),
                        bound: Some(tol),
                        margin: Some(tol - (p.lhs - p.rhs).abs()),
                        pass: Some((p.lhs - p.rhs).abs() <= tol),
                        ..base_row(NAME, &rs, c)
                    });
                }
                points.push(json!({"f": f.name(), "point": to_value(&p)}));
            }
        }
    }
    let mut verdict = from_checks(&rows);
    if exploratory && verdict == Verdict::Fail {
        verdict = Verdict::Inconclusive;
    }
    let details = json!({"eta": eta, "gamma": rs.gamma(), "exploratory": exploratory, "points": points});
    Ok(Outcome { verdict, rows, hypotheses: hyps, notes, details, tables: vec![], seeds: json!({ "sim_seed": sim.seed }) })
}

pub fn lyapunov(cfg: &LyapunovConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "lyapunov";
    let rs = cfg.system.build::<f64>()?;
    let n = rs.dim();
    check_points(std::slice::from_ref(&cfg.x0), n)?;
    check_times(&cfg.times, true)?;
    let drift = cfg.drift.build(n)?;
    let (hyps, _) = single_site_hypotheses(&rs, &drift)?;
    let rep = verify_lyapunov(&rs, &drift, &cfg.lyapunov.spec(), &[])?;
    let sim = with_seed(cfg.sim.clone(), seed.or(cfg.seed));
    let engine = FdEngine::new(&rs, drift, sim.clone())?;
    let c = cfg.drift.linear_c();
    let mut rows = vec![
        ResultRow { quantity: "C1".into(), estimate: rep.c1, ..base_row(NAME, &rs, c) },
        ResultRow { quantity: "C2".into(), estimate: rep.c2, ..base_row(NAME, &rs, c) },
        ResultRow {
            quantity: "radial_contraction".into(),
            estimate: rep.contraction,
            bound: Some(0.0),
            margin: Some(-rep.contraction),
            pass: Some(rep.pass),
            ..base_row(NAME, &rs, c)
        },
    ];
    let bounded = engine.lyapunov_boundedness(&rep, &cfg.x0, &cfg.times)?;
    for p in &bounded {
        rows.push(ResultRow {
            t: Some(p.t),
            x: Some(cfg.x0.clone()),
            quantity: "E[rho(X_t)]".into(),
            estimate: p.estimate,
            std_error: Some(p.std_error),
            bound: Some(p.bound),
            margin: Some(p.bound - p.estimate),
            pass: Some(p.pass),
            ..base_row(NAME, &rs, c)
        });
    }
    let verdict = from_checks(&rows);
    let details = json!({"lyapunov": to_value(&rep), "boundedness": to_value(&bounded)});
    Ok(Outcome { verdict, rows, hypotheses: hyps, notes: vec![], details, tables: vec![], seeds: json!({ "sim_seed": sim.seed }) })
}

pub fn invariant_measure(cfg: &InvariantConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "invariant-measure";
    let rs = cfg.system.build::<f64>()?;
    let n = rs.dim();
    check_points(std::slice::from_ref(&cfg.x0), n)?;
    let c = cfg.drift.linear_c().ok_or_else(|| LabError::Schema("invariant-measure needs a linear drift".into()))?;
    let drift = cfg.drift.build(n)?;
    let (hyps, _) = single_site_hypotheses(&rs, &drift)?;
    let sim = with_seed(cfg.sim.clone(), seed.or(cfg.seed));
    let engine = FdEngine::new(&rs, drift, sim.clone())?;
    let polys = parse_polys(&cfg.observables, n)?;
    let opts = InvariantOptions { t_burn: cfg.t_burn, t_long: cfg.t_long, ds: cfg.ds, quadrature_tol: cfg.quadrature_tol };
    let rep = verify_invariant_measure(&engine, &polys, &cfg.x0, &opts)?;
    let mut rows = Vec::new();
    for q in &rep.quadrature {
        let bound = 1e-6 * q.scale;
        rows.push(ResultRow {
            quantity: format!("int_Lf_dnu[{}]", q.f),
            estimate: q.integral,
            std_error: Some(0.0),
            bound: Some(bound),
            margin: Some(bound - q.integral.abs()),
            pass: Some(q.pass),
            ..base_row(NAME, &rs, Some(c))
        });
    }
    for m in &rep.moments {
        if let Some(r) = m.reference {
            rows.push(ResultRow {
                t: Some(cfg.t_long),
                x: Some(cfg.x0.clone()),
                quantity: format!("long_run[{}]", m.f),
                estimate: m.long_run,
                std_error: Some(m.long_run_se),
                bound: Some(r),
                margin: Some(N_SIGMA * m.long_run_se - (m.long_run - r).abs()),
                pass: Some(m.pass_long_run),
                ..base_row(NAME, &rs, Some(c))
            });
        }
        let d = m.time_average - m.long_run;
        rows.push(ResultRow {
            t: Some(cfg.t_long),
            x: Some(cfg.x0.clone()),
            quantity: format!("time_average_minus_long_run[{}]", m.f),
            estimate: d,
            std_error: Some(m.difference_se),
            bound: Some(0.0),
            margin: Some(N_SIGMA * m.difference_se - d.abs()),
            pass: Some(m.pass_time_average),
            ..base_row(NAME, &rs, Some(c))
        });
    }
    let mut verdict = from_checks(&rows);
    let mut notes = Vec::new();
    if rep.unreliable {
        notes.push("some replicas were flagged; moments marked unreliable".into());
        verdict = combine([verdict, Verdict::Inconclusive]);
    }
    Ok(Outcome { verdict, rows, hypotheses: hyps, notes, details: to_value(&rep), tables: vec![], seeds: json!({ "sim_seed": sim.seed }) })
}

struct LatticeSetup {
    spec: LatticeSpec,
    consts: PropagationConstants,
    hyps: Vec<Hypothesis>,
    sim: SimConfig,
    c: f64,
}

fn lattice_setup(desc: &LatticeDesc, sim: &SimConfig, seed: Option<u64>, audit_probes: usize) -> Result<LatticeSetup> {
    let spec = desc.build()?;
    let consts = compute_constants(&spec, desc.box_radius, None)?;
    let sim = with_seed(sim.clone(), seed);
    let hyps = lattice_hypotheses(&spec, &consts, audit_probes, sim.seed)?;
    Ok(LatticeSetup { c: desc.c.f64()?, spec, consts, hyps, sim })
}

fn lattice_notes(spec: &LatticeSpec) -> Vec<String> {
    if spec.outside_hypotheses {
        vec!["non-summable interaction: outside the summability hypothesis, exploratory run".into()]
    } else {
        vec![]
    }
}

pub fn lattice_sim(cfg: &LatticeSimConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "lattice-sim";
    check_times(&cfg.times, true)?;
    let s = lattice_setup(&cfg.lattice, &cfg.sim, seed.or(cfg.seed), cfg.audit_probes)?;
    let f = build_cylinder(&cfg.observable, &s.spec)?;
    let omega = build_configuration(&cfg.omega, &s.spec)?;
    let window = cfg.lattice.window_radius(&s.spec, &f.support());
    let est = simulate_window(&s.spec, &f, &omega, cfg.lattice.box_radius, window, &cfg.times, &s.sim)?;
    let rows: Vec<ResultRow> = est
        .iter()
        .map(|e| ResultRow {
            t: Some(e.t),
            quantity: format!("P_t[{}]", f.name()),
            estimate: e.mean,
            std_error: Some(e.std_error),
            ..base_row(NAME, &s.spec.rs, Some(s.c))
        })
        .collect();
    let unreliable = est.iter().any(|e| e.unreliable);
    let mut notes = lattice_notes(&s.spec);
    if unreliable {
        notes.push("some replicas were flagged".into());
    }
    let verdict = if unreliable { Verdict::Inconclusive } else { Verdict::Pass };
    let details = json!({"constants": to_value(&s.consts), "window_radius": window, "estimates": to_value(&est)});
    Ok(Outcome { verdict, rows, hypotheses: s.hyps, notes, details, tables: vec![], seeds: json!({ "sim_seed": s.sim.seed }) })
}

pub fn finite_speed(cfg: &FiniteSpeedConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "finite-speed";
    let s = lattice_setup(&cfg.lattice, &cfg.sim, seed.or(cfg.seed), 16)?;
    let f = build_cylinder(&cfg.observable, &s.spec)?;
    let mut opts = FiniteSpeedOptions::default_for(&s.spec);
    opts.s = cfg.s;
    if let Some(sites) = &cfg.sites {
        opts.sites = sites.clone();
    }
    opts.box_radius = cfg.lattice.box_radius;
    opts.window_radius = cfg.lattice.window_radius(&s.spec, &f.support());
    opts.h = cfg.h;
    opts.n_probes = cfg.n_probes;
    opts.probe_scale = cfg.probe_scale;
    opts.probe_seed = cfg.probe_seed;
    let rep = finite_speed_test(&s.spec, &f, &opts, &s.sim)?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for r in &rep.rows {
        let margin = r.envelope + N_SIGMA * r.std_error - r.gamma_tilde_est;
        rows.push(ResultRow {
            t: Some(opts.s),
            quantity: format!("gamma_tilde[l={}]", fmt_site(&r.site)),
            estimate: r.gamma_tilde_est,
            std_error: Some(r.std_error),
            bound: Some(r.envelope),
            margin: Some(margin),
            pass: Some(margin >= 0.0),
            ..base_row(NAME, &s.spec.rs, Some(s.c))
        });
        table.push(vec![
            fmt_site(&r.site),
            r.distance.to_string(),
            r.n_l.to_string(),
            crate::report::fmt_f64(r.gamma_tilde_est),
            crate::report::fmt_f64(r.std_error),
            crate::report::fmt_f64(r.envelope),
        ]);
    }
    let mut notes = lattice_notes(&s.spec);
    if rep.exact_zero {
        notes.push("all estimates are exactly zero".into());
    }
    Ok(Outcome {
        verdict: rep.verdict,
        rows,
        hypotheses: s.hyps,
        notes,
        details: to_value(&rep),
        tables: vec![("finite_speed.csv".into(), vec!["site", "distance", "N_l", "gamma_tilde_est", "std_error", "envelope"], table)],
        seeds: json!({ "probe_seed": cfg.probe_seed, "sim_seed": s.sim.seed }),
    })
}

pub fn cauchy(cfg: &CauchyConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "cauchy";
    let s = lattice_setup(&cfg.lattice, &cfg.sim, seed.or(cfg.seed), 16)?;
    let f = build_cylinder(&cfg.observable, &s.spec)?;
    let opts = CauchyOptions { t: cfg.t, radii: cfg.radii.clone(), n_probes: cfg.n_probes, probe_scale: cfg.probe_scale, probe_seed: cfg.probe_seed };
    let rep = cauchy_convergence_test(&s.spec, &f, &opts, &s.sim)?;
    let fmt = crate::report::fmt_f64;
    let rows = rep
        .rows
        .iter()
        .map(|r| ResultRow {
            t: Some(cfg.t),
            quantity: format!("D_n[{}->{}]", r.radius_from, r.radius_to),
            estimate: r.d_n,
            std_error: Some(r.std_error),
            ..base_row(NAME, &s.spec.rs, Some(s.c))
        })
        .collect();
    let table = rep
        .rows
        .iter()
        .map(|r| vec![r.radius_from.to_string(), r.radius_to.to_string(), r.n_tilde.to_string(), fmt(r.d_n), fmt(r.std_error), r.resolved.to_string()])
        .collect();
    let mut notes = lattice_notes(&s.spec);
    if rep.slope.is_none() && !rep.exact_zero {
        notes.push("fewer than two differences resolved above the rounding floor; no slope fitted".into());
    }
    Ok(Outcome {
        verdict: rep.verdict,
        rows,
        hypotheses: s.hyps,
        notes,
        details: to_value(&rep),
        tables: vec![("cauchy.csv".into(), vec!["radius_from", "radius_to", "n_tilde", "d_n", "std_error", "resolved"], table)],
        seeds: json!({ "probe_seed": cfg.probe_seed, "sim_seed": s.sim.seed }),
    })
}

pub fn ergodicity(cfg: &ErgodicityConfig, seed: Option<u64>) -> Result<Outcome> {
    const NAME: &str = "ergodicity";
    check_times(&cfg.times, false)?;
    let s = lattice_setup(&cfg.lattice, &cfg.sim, seed.or(cfg.seed), 16)?;
    let f = build_cylinder(&cfg.observable, &s.spec)?;
    let w = build_configuration(&cfg.omega, &s.spec)?;
    let w2 = build_configuration(&cfg.omega_prime, &s.spec)?;
    let rep = ergodicity_test(&s.spec, &f, &w, &w2, cfg.lattice.box_radius, &cfg.times, &s.sim)?;
    let fmt = crate::report::fmt_f64;
    let mut rows: Vec<ResultRow> = rep
        .rows
        .iter()
        .map(|r| ResultRow { t: Some(r.t), quantity: "delta".into(), estimate: r.delta, std_error: Some(r.std_error), ..base_row(NAME, &s.spec.rs, Some(s.c)) })
        .collect();
    if let (Some(rate), Some(se)) = (rep.rate, rep.rate_se) {
        rows.push(ResultRow { quantity: "rate".into(), estimate: rate, std_error: Some(se), ..base_row(NAME, &s.spec.rs, Some(s.c)) });
    }
    let table = rep.rows.iter().map(|r| vec![fmt(r.t), fmt(r.delta), fmt(r.std_error)]).collect();
    let mut notes = lattice_notes(&s.spec);
    if !rep.regime_ok {
        notes.push("outside the ergodic regime eta_tilde < 0, C_tilde <= -2 eta_tilde".into());
    }
    Ok(Outcome {
        verdict: rep.verdict,
        rows,
        hypotheses: s.hyps,
        notes,
        details: to_value(&rep),
        tables: vec![("ergodicity.csv".into(), vec!["t", "delta", "std_error"], table)],
        seeds: json!({ "sim_seed": s.sim.seed }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dunkl_core::{ratio, Family};

    #[test]
    fn linear_moments_in_rank_one() {
        let rs = RootSystem::<f64>::build_standard(Family::A, 1, &[ratio(1, 4)]).unwrap();
        let (m1, m2) = linear_moments(&rs, 1.0, &[0.8], 0.5);
        assert!((m1[0] - 0.8 * (-0.75f64).exp()).abs() < 1e-13);
        assert!((m2 - (1.5 + (0.64 - 1.5) * (-1.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn matrix_exponential_of_diagonal() {
        let m = vec![vec![1.0, 0.0], vec![0.0, 3.0]];
        let y = expm_apply(&m, 2.0, &[1.0, 1.0]);
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-14);
        assert!((y[1] - (-6.0f64).exp()).abs() < 1e-14);
    }
}
