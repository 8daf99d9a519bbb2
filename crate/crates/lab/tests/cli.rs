//! End-to-end runs of the binary: artifacts, determinism and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dunkl-lab"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, cfg: &Path, out: &Path, extra: &[&str], threads: Option<&str>) -> i32 {
    let mut c = bin();
    c.arg(sub).arg("--config").arg(cfg).arg("--out").arg(out).args(extra);
    if let Some(t) = threads {
        c.env("DUNKL_LAB_THREADS", t);
    }
    c.output().unwrap().status.code().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

const SMALL_FD: &str = r#"{"experiment": "fd-sim", "seed": 5, "sim": {"n_replicas": 400, "dt": 0.01}, "times": [0.5, 1.0]}"#;

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "fd.json", SMALL_FD);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("fd-sim", &cfg, &a, &[], Some("1")), 0);
    assert_eq!(run("fd-sim", &cfg, &b, &[], Some("3")), 0);
    for f in ["results.csv", "summary.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&read(&a.join("summary.json"))).unwrap();
    assert_eq!(summary["verdict"], "pass");
    assert_eq!(summary["seeds"]["sim_seed"], 5);
    assert!(summary["versions"]["dunkl-sim"].is_string());
    let items: Vec<&str> = summary["hypotheses"].as_array().unwrap().iter().map(|h| h["item"].as_str().unwrap()).collect();
    for item in ["gamma_condition", "g_condition", "eta_sign", "gamma_below_half", "zeta_finite", "eta_tilde_c_tilde"] {
        assert!(items.contains(&item), "{item} missing from {items:?}");
    }
}

#[test]
fn seed_flag_changes_estimates_but_not_schema() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "fd.json", SMALL_FD);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("fd-sim", &cfg, &a, &[], None), 0);
    assert_eq!(run("fd-sim", &cfg, &b, &["--seed", "6"], None), 0);
    let (ra, rb) = (read(&a.join("results.csv")), read(&b.join("results.csv")));
    assert_ne!(ra, rb);
    assert_eq!(ra.lines().next(), rb.lines().next());
    assert_eq!(ra.lines().count(), rb.lines().count());
}

#[test]
fn empty_result_set_gives_header_only_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "e.json", r#"{"observables": [], "moment_oracles": false, "times": []}"#);
    let out = dir.path().join("o");
    assert_eq!(run("fd-sim", &cfg, &out, &[], None), 0);
    assert_eq!(read(&out.join("results.csv")), "experiment,system,k,c,t,x,quantity,estimate,std_error,bound,margin,pass\n");
}

#[test]
fn exit_codes_separate_schema_audit_and_failure() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let unknown = write(dir.path(), "u.json", r#"{"bogus": 1}"#);
    assert_eq!(run("fd-sim", &unknown, &out, &[], None), 2);
    let wrong = write(dir.path(), "w.json", r#"{"experiment": "cauchy"}"#);
    assert_eq!(run("fd-sim", &wrong, &out, &[], None), 2);
    let bad_threads = write(dir.path(), "t.json", SMALL_FD);
    assert_eq!(run("fd-sim", &bad_threads, &out, &[], Some("zero")), 2);
    // A constant drift breaks both rate positivity and equivariance.
    let audit = write(dir.path(), "a.json", r#"{"drift": {"kind": "polynomial", "components": ["1"]}}"#);
    assert_eq!(run("fd-sim", &audit, &out, &[], None), 3);
    // Far from stationarity the long-run and time-average moments disagree.
    let fail = write(dir.path(), "f.json", r#"{"x0": [3.0], "t_burn": 0.1, "t_long": 0.6, "ds": 0.1}"#);
    let fout = dir.path().join("f");
    assert_eq!(run("invariant-measure", &fail, &fout, &[], None), 1);
    let summary: serde_json::Value = serde_json::from_str(&read(&fout.join("summary.json"))).unwrap();
    assert_eq!(summary["verdict"], "fail");
    assert_eq!(summary["exit_code"], 1);
}

#[test]
fn calculus_check_on_a2_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"systems": [{"family": "A", "rank": 2, "k": "1/3"}], "n_polys": 20, "rate_probes": 500}"#);
    let out = dir.path().join("o");
    assert_eq!(run("calculus-check", &cfg, &out, &[], None), 0);
    let csv = read(&out.join("results.csv"));
    let identities: Vec<&str> = csv.lines().skip(1).filter(|l| !l.contains("min_jump_rate") && !l.contains(",eta,")).collect();
    assert_eq!(identities.len(), 6);
    for l in identities {
        let cells: Vec<&str> = l.split(',').collect();
        assert_eq!(cells[7], "0", "{l}");
        assert_eq!(cells[11], "true", "{l}");
    }
}

#[test]
fn gradient_bound_with_large_gamma_is_exploratory() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"system": {"family": "A", "rank": 1, "k": 0.6}, "sim": {"n_replicas": 200, "dt": 0.01}, "observables": ["tanh(x1)"], "times": [0.0, 0.5], "probes": {"count": 2}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(run("gradient-bound", &cfg, &out, &[], None), 0);
    let summary: serde_json::Value = serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    assert_eq!(summary["details"]["exploratory"], true);
    assert!(summary["notes"][0].as_str().unwrap().contains("outside the coercive regime"));
    let eta = summary["hypotheses"].as_array().unwrap().iter().find(|h| h["item"] == "eta_sign").unwrap();
    assert_eq!(eta["status"], "warn");
}

#[test]
fn lattice_experiments_write_their_tables() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"lattice": {"d": 1, "N": 1, "family": "A", "rank": 1, "k": 0.25, "c": 1.0, "eps0": 0.1, "decay": {"type": "summable", "delta": 1.0}, "range": 2, "box_radius": 2}, "sim": {"n_replicas": 64, "dt": 0.01}, "times": [0.5, 1.0]}"#,
    );
    assert_eq!(run("ergodicity", &cfg, &out, &[], None), 0);
    assert_eq!(read(&out.join("ergodicity.csv")).lines().next(), Some("t,delta,std_error"));
    let mismatch = write(dir.path(), "n.json", r#"{"lattice": {"N": 2}}"#);
    assert_eq!(run("lattice-sim", &mismatch, &out, &[], None), 2);
    let small = write(dir.path(), "s.json", r#"{"lattice": {"box_radius": 3, "window_radius": 3}, "sim": {"n_replicas": 8}}"#);
    assert_eq!(run("lattice-sim", &small, &out, &[], None), 2);
}
