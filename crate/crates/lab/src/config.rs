//! JSON experiment configurations. Unknown keys are rejected everywhere.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use dunkl_core::observable::{parse_observable, Observable};
use dunkl_core::scalar::rational_from_f64;
use dunkl_core::{parse_poly, parse_rational, DriftSpec, Family, MultiPoly, Rational, RootSystem, Scalar};
use dunkl_sim::lattice::{build_default_model, Configuration, Cylinder, Decay, LatticeSpec};
use dunkl_sim::lyapunov::LyapunovSpec;
use dunkl_sim::SimConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A number given as a JSON number or as a rational string like `"1/3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Text(String),
}

impl Num {
    pub fn rational(&self) -> Result<Rational> {
        match self {
            Num::Float(v) => rational_from_f64(*v).ok_or_else(|| LabError::Schema(format!("{v} is not a finite number"))),
            Num::Text(s) => parse_rational(s).ok_or_else(|| LabError::Schema(format!("cannot parse {s:?} as a rational"))),
        }
    }

    pub fn f64(&self) -> Result<f64> {
        Ok(self.rational()?.to_f64())
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Float(v)
    }
}

/// One multiplicity for every orbit, or one per orbit (per root for explicit systems).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KDesc {
    One(Num),
    Many(Vec<Num>),
}

impl KDesc {
    pub fn rationals(&self) -> Result<Vec<Rational>> {
        match self {
            KDesc::One(v) => Ok(vec![v.rational()?]),
            KDesc::Many(v) => v.iter().map(Num::rational).collect(),
        }
    }
}

/// Root system descriptor: a catalog family or an explicit root list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDesc {
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub rank: Option<usize>,
    /// Order of the dihedral family `I2`.
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub roots: Option<Vec<Vec<Num>>>,
    pub k: KDesc,
}

impl SystemDesc {
    pub fn standard(family: &str, rank: usize, k: Num) -> Self {
        Self { family: Some(family.into()), rank: Some(rank), m: None, roots: None, k: KDesc::One(k) }
    }

    fn family(&self) -> Result<Family> {
        let name = self.family.as_deref().unwrap_or("");
        match (name, self.m) {
            ("A", None) => Ok(Family::A),
            ("B", None) => Ok(Family::B),
            ("D", None) => Ok(Family::D),
            ("I2", Some(m)) => Ok(Family::I2(m)),
            ("I2", None) => Err(LabError::Schema("family I2 needs the order m".into())),
            (_, Some(_)) => Err(LabError::Schema("m is only meaningful for family I2".into())),
            _ => Err(LabError::Schema(format!("unknown family {name:?}; expected A, B, D or I2"))),
        }
    }

    pub fn build<S: Scalar>(&self) -> Result<RootSystem<S>> {
        let k = self.k.rationals()?;
        match (&self.family, &self.roots) {
            (Some(_), None) => {
                let rank = self.rank.ok_or_else(|| LabError::Schema("a catalog system needs a rank".into()))?;
                Ok(RootSystem::build_standard(self.family()?, rank, &k)?)
            }
            (None, Some(roots)) => {
                if self.rank.is_some() || self.m.is_some() {
                    return Err(LabError::Schema("explicit roots take no rank or m".into()));
                }
                let roots: Vec<Vec<S>> = roots
                    .iter()
                    .map(|r| r.iter().map(|v| v.rational().map(|q| S::from_rational(&q))).collect::<Result<Vec<S>>>())
                    .collect::<Result<_>>()?;
                Ok(RootSystem::from_explicit(&roots, &k)?)
            }
            _ => Err(LabError::Schema("give exactly one of family or roots".into())),
        }
    }
}

impl Default for SystemDesc {
    fn default() -> Self {
        Self::standard("A", 1, Num::Text("1/4".into()))
    }
}

/// Drift descriptor. Black-box fields cannot be read from JSON; polynomial
/// fields cover the non-linear cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriftDesc {
    Linear { c: Num },
    Polynomial { components: Vec<String> },
}

impl Default for DriftDesc {
    fn default() -> Self {
        DriftDesc::Linear { c: Num::Float(1.0) }
    }
}

impl DriftDesc {
    pub fn build(&self, n: usize) -> Result<DriftSpec> {
        match self {
            DriftDesc::Linear { c } => Ok(DriftSpec::linear(c.rational()?)),
            DriftDesc::Polynomial { components } => {
                if components.len() != n {
                    return Err(LabError::Schema(format!("polynomial drift needs {n} components, got {}", components.len())));
                }
                let field = components.iter().map(|s| parse_poly::<Rational>(s, n)).collect::<dunkl_core::Result<Vec<_>>>()?;
                Ok(DriftSpec::polynomial(field, None))
            }
        }
    }

    pub fn linear_c(&self) -> Option<f64> {
        match self {
            DriftDesc::Linear { c } => c.f64().ok(),
            DriftDesc::Polynomial { .. } => None,
        }
    }
}

pub fn parse_observables(list: &[String], n: usize) -> Result<Vec<Arc<dyn Observable>>> {
    list.iter().map(|s| parse_observable(s, n).map_err(LabError::from)).collect()
}

pub fn parse_polys(list: &[String], n: usize) -> Result<Vec<MultiPoly<f64>>> {
    list.iter().map(|s| parse_poly::<f64>(s, n).map_err(LabError::from)).collect()
}

/// Probe points: an explicit list or quasi-random points of a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeDesc {
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default = "d_probe_count")]
    pub count: usize,
    #[serde(default = "d_probe_radius")]
    pub radius: f64,
}

fn d_probe_count() -> usize {
    8
}
fn d_probe_radius() -> f64 {
    3.0
}

impl Default for ProbeDesc {
    fn default() -> Self {
        Self { points: None, count: d_probe_count(), radius: d_probe_radius() }
    }
}

impl ProbeDesc {
    pub fn points(&self, rs: &RootSystem<f64>) -> Result<Vec<Vec<f64>>> {
        let pts = match &self.points {
            Some(p) => p.clone(),
            None => dunkl_core::probes::ball_probes(rs, self.count, self.radius),
        };
        check_points(&pts, rs.dim())?;
        Ok(pts)
    }
}

pub fn check_points(pts: &[Vec<f64>], n: usize) -> Result<()> {
    match pts.iter().find(|p| p.len() != n) {
        Some(p) => Err(LabError::Schema(format!("point {p:?} must have {n} coordinates"))),
        None => Ok(()),
    }
}

pub fn check_times(times: &[f64], allow_zero: bool) -> Result<()> {
    let ok_start = times.first().is_none_or(|&t| if allow_zero { t >= 0.0 } else { t > 0.0 });
    if !ok_start || times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
        return Err(LabError::Schema(format!("times must be finite, increasing and {}", if allow_zero { "nonnegative" } else { "positive" })));
    }
    Ok(())
}

macro_rules! defaults {
    ($($name:ident: $ty:ty = $val:expr;)*) => {
        $(fn $name() -> $ty { $val })*
    };
}

defaults! {
    d_times_short: Vec<f64> = vec![0.25, 0.5, 1.0];
    d_x0: Vec<f64> = vec![0.8];
    d_fd_obs: Vec<String> = vec!["x1".into(), "x1^2".into()];
    d_grad_obs: Vec<String> = vec!["x1".into(), "tanh(x1)".into()];
    d_grad_times: Vec<f64> = vec![0.0, 0.25, 0.5, 1.0];
    d_h: f64 = 1e-3;
    d_fd_tol: f64 = 1e-4;
    d_lyap_times: Vec<f64> = vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
    d_lyap_x0: Vec<f64> = vec![4.0];
    d_inv_obs: Vec<String> = vec!["x1".into(), "x1^2".into(), "x1^4".into()];
    d_inv_x0: Vec<f64> = vec![0.5];
    d_t_burn: f64 = 10.0;
    d_t_long: f64 = 16.0;
    d_ds: f64 = 0.05;
    d_qtol: f64 = 1e-10;
    d_systems: Vec<SystemDesc> = vec![
        SystemDesc::standard("A", 1, Num::Text("1/4".into())),
        SystemDesc::standard("A", 2, Num::Text("1/3".into())),
        SystemDesc::standard("A", 3, Num::Text("2/5".into())),
        SystemDesc::standard("D", 4, Num::Text("1/6".into())),
    ];
    d_n_polys: usize = 100;
    d_max_degree: u32 = 6;
    d_n_terms: usize = 4;
    d_carre_every: usize = 4;
    d_float_tol: f64 = 1e-9;
    d_calc_drift: Option<DriftDesc> = Some(DriftDesc::Linear { c: Num::Text("3/2".into()) });
    d_cyl: Vec<TermDesc> = vec![TermDesc { site: vec![0], f: "tanh(x1)".into() }];
    d_lat_times: Vec<f64> = vec![0.25, 0.5, 1.0];
    d_erg_times: Vec<f64> = (1..=8).map(|i| 0.25 * i as f64).collect();
    d_erg_obs: Vec<TermDesc> = vec![TermDesc { site: vec![0], f: "x1".into() }];
    d_omega: Vec<SiteValue> = vec![SiteValue { site: vec![0], x: vec![1.0] }];
    d_omega_prime: Vec<SiteValue> = vec![SiteValue { site: vec![0], x: vec![-1.0] }];
    d_s: f64 = 0.5;
    d_fs_h: f64 = 0.25;
    d_fs_probes: usize = 32;
    d_probe_scale: f64 = 2.0;
    d_fs_seed: u64 = 7;
    d_cauchy_t: f64 = 1.0;
    d_radii: Vec<i64> = vec![2, 4, 6, 8];
    d_cauchy_probes: usize = 4;
    d_cauchy_seed: u64 = 11;
    d_audit_probes: usize = 16;
    d_lat_sim: SimConfig = SimConfig { n_replicas: 200, dt: 5e-3, ..SimConfig::default() };
    d_k_lat: KDesc = KDesc::One(Num::Float(0.25));
    d_c_lat: Num = Num::Float(1.0);
    d_eps0: f64 = 0.1;
    d_decay: Decay = Decay::Summable { delta: 1.0 };
    d_range: i64 = 2;
    d_box: i64 = 6;
    d_family: String = "A".into();
    d_one: usize = 1;
}

/// Fields shared by every experiment file.
pub trait Common {
    fn experiment(&self) -> Option<&str>;
    fn seed(&self) -> Option<u64>;
    fn out(&self) -> Option<&str>;
}

macro_rules! common {
    ($t:ty) => {
        impl Common for $t {
            fn experiment(&self) -> Option<&str> {
                self.experiment.as_deref()
            }
            fn seed(&self) -> Option<u64> {
                self.seed
            }
            fn out(&self) -> Option<&str> {
                self.out.as_deref()
            }
        }
    };
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalculusConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default = "d_systems")]
    pub systems: Vec<SystemDesc>,
    /// Polynomial drift used for the generator decomposition; `null` skips it.
    #[serde(default = "d_calc_drift")]
    pub drift: Option<DriftDesc>,
    #[serde(default = "d_n_polys")]
    pub n_polys: usize,
    #[serde(default = "d_max_degree")]
    pub max_degree: u32,
    #[serde(default = "d_n_terms")]
    pub n_terms: usize,
    #[serde(default = "d_carre_every")]
    pub carre_every: usize,
    /// Relative tolerance used only when a system needs floating scalars.
    #[serde(default = "d_float_tol")]
    pub float_tol: f64,
    /// Number of rate-positivity probes for the generator decomposition.
    #[serde(default = "d_rate_probes")]
    pub rate_probes: usize,
}
common!(CalculusConfig);

fn d_rate_probes() -> usize {
    10_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSimConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub system: SystemDesc,
    #[serde(default)]
    pub drift: DriftDesc,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default = "d_x0")]
    pub x0: Vec<f64>,
    #[serde(default = "d_fd_obs")]
    pub observables: Vec<String>,
    #[serde(default = "d_times_short")]
    pub times: Vec<f64>,
    /// Add closed-form moment rows for linear drifts.
    #[serde(default = "d_true")]
    pub moment_oracles: bool,
    /// Allowance for time-discretisation bias in the oracle comparison.
    #[serde(default)]
    pub bias_tol: f64,
}
common!(FdSimConfig);

fn d_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub system: SystemDesc,
    #[serde(default)]
    pub drift: DriftDesc,
    #[serde(default = "d_grad_sim")]
    pub sim: SimConfig,
    #[serde(default = "d_grad_obs")]
    pub observables: Vec<String>,
    #[serde(default = "d_grad_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub probes: ProbeDesc,
    /// Central difference step.
    #[serde(default = "d_h")]
    pub h: f64,
    /// Relative finite-difference tolerance added to the 3 sigma allowance.
    #[serde(default = "d_fd_tol")]
    pub fd_tol: f64,
}
common!(GradientConfig);

fn d_grad_sim() -> SimConfig {
    SimConfig { n_replicas: 2000, dt: 2e-3, ..SimConfig::default() }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovDesc {
    pub c2: f64,
    pub r_max: f64,
    pub n_radii: usize,
}

impl Default for LyapunovDesc {
    fn default() -> Self {
        let d = LyapunovSpec::default();
        Self { c2: d.c2, r_max: d.r_max, n_radii: d.n_radii }
    }
}

impl LyapunovDesc {
    pub fn spec(&self) -> LyapunovSpec {
        LyapunovSpec { c2: self.c2, r_max: self.r_max, n_radii: self.n_radii }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub system: SystemDesc,
    #[serde(default)]
    pub drift: DriftDesc,
    #[serde(default = "d_lyap_sim")]
    pub sim: SimConfig,
    #[serde(default)]
    pub lyapunov: LyapunovDesc,
    #[serde(default = "d_lyap_x0")]
    pub x0: Vec<f64>,
    #[serde(default = "d_lyap_times")]
    pub times: Vec<f64>,
}
common!(LyapunovConfig);

fn d_lyap_sim() -> SimConfig {
    SimConfig { n_replicas: 2000, dt: 1e-2, ..SimConfig::default() }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub system: SystemDesc,
    #[serde(default)]
    pub drift: DriftDesc,
    #[serde(default = "d_inv_sim")]
    pub sim: SimConfig,
    #[serde(default = "d_inv_obs")]
    pub observables: Vec<String>,
    #[serde(default = "d_inv_x0")]
    pub x0: Vec<f64>,
    #[serde(default = "d_t_burn")]
    pub t_burn: f64,
    #[serde(default = "d_t_long")]
    pub t_long: f64,
    #[serde(default = "d_ds")]
    pub ds: f64,
    #[serde(default = "d_qtol")]
    pub quadrature_tol: f64,
}
common!(InvariantConfig);

fn d_inv_sim() -> SimConfig {
    SimConfig { n_replicas: 2000, dt: 1e-2, ..SimConfig::default() }
}

/// `{"site": [..], "f": "tanh(x1)"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDesc {
    pub site: Vec<i64>,
    pub f: String,
}

/// `{"site": [..], "x": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteValue {
    pub site: Vec<i64>,
    pub x: Vec<f64>,
}

/// The lattice model block.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDesc {
    #[serde(default = "d_one")]
    pub d: usize,
    /// Site dimension; checked against the root system.
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default = "d_family")]
    pub family: String,
    #[serde(default = "d_one")]
    pub rank: usize,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default = "d_k_lat")]
    pub k: KDesc,
    #[serde(default = "d_c_lat")]
    pub c: Num,
    #[serde(default = "d_eps0")]
    pub eps0: f64,
    #[serde(default = "d_decay")]
    pub decay: Decay,
    #[serde(default = "d_range")]
    pub range: i64,
    #[serde(default = "d_box")]
    pub box_radius: i64,
    #[serde(default)]
    pub window_radius: Option<i64>,
    /// Permit a non-summable interaction (outside the summability hypothesis).
    #[serde(default)]
    pub allow_uniform: bool,
}

impl Default for LatticeDesc {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl LatticeDesc {
    pub fn system_desc(&self) -> SystemDesc {
        SystemDesc { family: Some(self.family.clone()), rank: Some(self.rank), m: self.m, roots: None, k: self.k.clone() }
    }

    pub fn build(&self) -> Result<LatticeSpec> {
        let rs = self.system_desc().build::<f64>()?;
        if let Some(n) = self.n {
            if n != rs.dim() {
                return Err(LabError::Schema(format!("N = {n} but {} acts on R^{}", rs.label(), rs.dim())));
            }
        }
        Ok(build_default_model(self.d, &rs, self.c.rational()?, self.eps0, self.decay, self.range, self.allow_uniform)?)
    }

    pub fn window_radius(&self, spec: &LatticeSpec, support: &[Vec<i64>]) -> i64 {
        self.window_radius.unwrap_or_else(|| spec.required_window_radius(self.box_radius, support))
    }
}

pub fn build_cylinder(terms: &[TermDesc], spec: &LatticeSpec) -> Result<Cylinder> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in terms {
        if t.site.len() != spec.d {
            return Err(LabError::Schema(format!("site {:?} must have {} coordinates", t.site, spec.d)));
        }
        if !seen.insert(t.site.clone()) {
            return Err(LabError::Schema(format!("site {:?} appears twice", t.site)));
        }
        out.push((t.site.clone(), parse_observable(&t.f, spec.n())?));
    }
    Ok(Cylinder::new(out)?)
}

pub fn build_configuration(values: &[SiteValue], spec: &LatticeSpec) -> Result<Configuration> {
    let mut w = Configuration::zero(spec.n());
    for v in values {
        if v.site.len() != spec.d || v.x.len() != spec.n() {
            return Err(LabError::Schema(format!("site value {:?} must have {} site and {} value coordinates", v, spec.d, spec.n())));
        }
        w.set(&v.site, v.x.clone());
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSimConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub lattice: LatticeDesc,
    #[serde(default = "d_lat_sim")]
    pub sim: SimConfig,
    #[serde(default = "d_cyl")]
    pub observable: Vec<TermDesc>,
    #[serde(default = "d_omega")]
    pub omega: Vec<SiteValue>,
    #[serde(default = "d_lat_times")]
    pub times: Vec<f64>,
    #[serde(default = "d_audit_probes")]
    pub audit_probes: usize,
}
common!(LatticeSimConfig);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSpeedConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub lattice: LatticeDesc,
    #[serde(default = "d_lat_sim")]
    pub sim: SimConfig,
    #[serde(default = "d_cyl")]
    pub observable: Vec<TermDesc>,
    #[serde(default = "d_s")]
    pub s: f64,
    /// Sites probed; defaults to `[1], [R], [2R]` along the first axis.
    #[serde(default)]
    pub sites: Option<Vec<Vec<i64>>>,
    #[serde(default = "d_fs_h")]
    pub h: f64,
    #[serde(default = "d_fs_probes")]
    pub n_probes: usize,
    #[serde(default = "d_probe_scale")]
    pub probe_scale: f64,
    #[serde(default = "d_fs_seed")]
    pub probe_seed: u64,
}
common!(FiniteSpeedConfig);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub lattice: LatticeDesc,
    #[serde(default = "d_lat_sim")]
    pub sim: SimConfig,
    #[serde(default = "d_cyl")]
    pub observable: Vec<TermDesc>,
    #[serde(default = "d_cauchy_t")]
    pub t: f64,
    #[serde(default = "d_radii")]
    pub radii: Vec<i64>,
    #[serde(default = "d_cauchy_probes")]
    pub n_probes: usize,
    #[serde(default = "d_probe_scale")]
    pub probe_scale: f64,
    #[serde(default = "d_cauchy_seed")]
    pub probe_seed: u64,
}
common!(CauchyConfig);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgodicityConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub lattice: LatticeDesc,
    #[serde(default = "d_erg_sim")]
    pub sim: SimConfig,
    #[serde(default = "d_erg_obs")]
    pub observable: Vec<TermDesc>,
    #[serde(default = "d_omega")]
    pub omega: Vec<SiteValue>,
    #[serde(default = "d_omega_prime")]
    pub omega_prime: Vec<SiteValue>,
    #[serde(default = "d_erg_times")]
    pub times: Vec<f64>,
}
common!(ErgodicityConfig);

fn d_erg_sim() -> SimConfig {
    SimConfig { n_replicas: 2000, dt: 5e-3, ..SimConfig::default() }
}

/// Reads and validates a config file for subcommand `name`.
pub fn load<T: DeserializeOwned + Common>(path: &Path, name: &str) -> Result<(T, serde_json::Value)> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| LabError::Schema(format!("{}: {e}", path.display())))?;
    let cfg: T = serde_json::from_value(raw.clone()).map_err(|e| LabError::Schema(format!("{}: {e}", path.display())))?;
    if let Some(exp) = cfg.experiment() {
        if exp != name {
            return Err(LabError::Schema(format!("config is for experiment {exp:?}, not {name:?}")));
        }
    }
    Ok((cfg, raw))
}
