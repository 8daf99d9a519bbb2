//! Lattice system: decoupling, locality and the bound table.

use std::sync::Arc;

use dunkl_core::observable::{parse_observable, Observable};
use dunkl_core::{ratio, DriftSpec, Family, RootSystem};
use dunkl_sim::fd::N_SIGMA;
use dunkl_sim::lattice::*;
use dunkl_sim::rng::site_code;
use dunkl_sim::{FdEngine, JumpMode, SimConfig, SimError, Verdict};

fn a1() -> RootSystem<f64> {
    RootSystem::build_standard(Family::A, 1, &[ratio(1, 4)]).unwrap()
}

fn spec(eps0: f64) -> LatticeSpec {
    build_default_model(1, &a1(), ratio(1, 1), eps0, Decay::Summable { delta: 1.0 }, 2, false).unwrap()
}

fn cfg(n: usize) -> SimConfig {
    SimConfig { n_replicas: n, dt: 5e-3, jump_mode: JumpMode::Averaged, ..SimConfig::default() }
}

fn obs(s: &str) -> Arc<dyn Observable> {
    parse_observable(s, 1).unwrap()
}

#[test]
fn decoupled_window_reproduces_single_site_runs() {
    let spec = spec(0.0);
    let times = [0.3, 1.0];
    let omega = Configuration::zero(1).with(&[0], vec![0.7]).with(&[2], vec![-1.3]);
    for site in [vec![0i64], vec![2]] {
        let f = Cylinder::single(site.clone(), obs("tanh(x1)"));
        let lattice = simulate_window(&spec, &f, &omega, 2, 3, &times, &cfg(64)).unwrap();
        let engine = FdEngine::new(&a1(), DriftSpec::linear(ratio(1, 1)), cfg(64)).unwrap().with_stream(site_code(&site));
        let single = engine.estimate_pt_path(obs("tanh(x1)").as_ref(), &omega.value(&site), &times).unwrap();
        for (a, b) in lattice.iter().zip(&single) {
            assert_eq!(a.mean, b.mean, "site {site:?} t={}", a.t);
            assert_eq!(a.std_error, b.std_error);
        }
    }
}

#[test]
fn decoupled_first_moment_decays_at_the_site_rate() {
    let spec = spec(0.0);
    let f = Cylinder::single(vec![0], obs("x1"));
    let omega = Configuration::zero(1).with(&[0], vec![1.0]);
    let times = [0.25, 0.5, 1.0];
    for e in simulate_window(&spec, &f, &omega, 1, 2, &times, &cfg(4000)).unwrap() {
        let exact = (-1.5 * e.t).exp();
        assert!((e.mean - exact).abs() <= N_SIGMA * e.std_error + 2e-3, "t={}: {} vs {exact}", e.t, e.mean);
    }
}

#[test]
fn decoupled_boxes_give_zero_cauchy_differences() {
    let f = Cylinder::single(vec![0], obs("tanh(x1)"));
    let opts = CauchyOptions { radii: vec![1, 2, 3], n_probes: 2, ..CauchyOptions::default() };
    let rep = cauchy_convergence_test(&spec(0.0), &f, &opts, &cfg(32)).unwrap();
    assert!(rep.exact_zero);
    assert!(rep.rows.iter().all(|r| r.d_n == 0.0));
}

#[test]
fn identical_configurations_have_zero_distance() {
    let f = Cylinder::single(vec![0], obs("x1"));
    let w = Configuration::zero(1).with(&[0], vec![0.4]).with(&[1], vec![-2.0]);
    let rep = ergodicity_test(&spec(0.1), &f, &w, &w, 2, &[0.5, 1.0], &cfg(32)).unwrap();
    assert!(rep.exact_zero);
    assert!(rep.rows.iter().all(|r| r.delta == 0.0));
}

#[test]
fn default_family_bounds_match_a_grid_search() {
    let spec = spec(0.1);
    let b = &spec.interaction.bounds;
    let u = |x: f64| {
        let mut o = [0.0];
        (spec.interaction.u)(&[x], &mut o);
        o[0]
    };
    let v = &spec.interaction.v;
    let (mut u_sup, mut du_sup, mut v_sup, mut dv_sup) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let h = 1e-6;
    for i in 0..=40_000 {
        let x = -20.0 + 1e-3 * i as f64;
        u_sup = u_sup.max(u(x).abs());
        du_sup = du_sup.max(((u(x + h) - u(x - h)) / (2.0 * h)).abs());
        let s = x * x;
        v_sup = v_sup.max(v(s).abs());
        // d/dx v(|x|^2) in one dimension.
        dv_sup = dv_sup.max(((v((x + h) * (x + h)) - v((x - h) * (x - h))) / (2.0 * h)).abs());
    }
    assert!((u_sup - 0.5).abs() < 1e-6 && u_sup <= b.u_sup + 1e-12);
    assert!((du_sup - 1.0).abs() < 1e-6 && du_sup <= b.du_sup + 1e-9);
    assert!((v_sup - 1.0).abs() < 1e-12 && v_sup <= b.v_sup + 1e-12);
    assert!((dv_sup - 9.0 / (8.0 * 3f64.sqrt())).abs() < 1e-5 && dv_sup <= b.dv_sup + 1e-9);
}

#[test]
fn e_table_is_local_and_finite() {
    let spec = spec(0.1);
    let here = e_entry(&spec, &[0], &[0]);
    let near = e_entry(&spec, &[0], &[1]);
    assert!(here > 0.0 && near > 0.0);
    assert_eq!(e_entry(&spec, &[0], &[2]), 0.0);
    assert_eq!(e_entry(&spec, &[0], &[3]), 0.0);
    assert_eq!(e_entry(&spec, &[0], &[-5]), 0.0);
}

#[test]
fn audits_pass_and_small_windows_are_refused() {
    let spec = spec(0.1);
    let audit = audit_lattice(&spec, 8, 3).unwrap();
    assert!(audit.pass, "{audit:?}");
    let f = Cylinder::single(vec![0], obs("x1"));
    let omega = Configuration::zero(1);
    match simulate_window(&spec, &f, &omega, 3, 3, &[0.5], &cfg(8)) {
        Err(SimError::WindowTooSmall { required, got }) => assert_eq!((required, got), (4, 3)),
        other => panic!("expected WindowTooSmall, got {other:?}"),
    }
}

#[test]
fn finite_speed_decays_with_distance() {
    let spec = build_default_model(1, &a1(), ratio(1, 1), 0.1, Decay::Summable { delta: 1.0 }, 2, false).unwrap();
    let f = Cylinder::single(vec![0], obs("tanh(x1)"));
    let mut opts = FiniteSpeedOptions::default_for(&spec);
    opts.n_probes = 4;
    let rep = finite_speed_test(&spec, &f, &opts, &cfg(100)).unwrap();
    assert!(rep.below_envelope, "{:?}", rep.rows);
    assert_ne!(rep.verdict, Verdict::Fail);
}
