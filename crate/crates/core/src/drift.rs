//! Drift fields `b` and the hypothesis audits they must pass.

use std::fmt;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::linalg::{dot_f64, norm_f64};
use crate::poly::MultiPoly;
use crate::root_system::RootSystem;
use crate::scalar::{Rational, Scalar};

/// Bounds entering `eta`: `sup_x d_i b_i`, `max_{i!=j} |d_j b_i|_inf` and
/// `max_a |A_a b|_inf^2` (squared so linear drifts stay exact).
#[derive(Clone, Debug, PartialEq)]
pub struct DriftBounds<S> {
    pub sup_diag: S,
    pub max_offdiag: S,
    pub max_a_alpha_sq: S,
}

type Field = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum DriftKind {
    /// `b(x) = -c x`.
    Linear { c: Rational },
    /// Polynomial components.
    Polynomial { field: Vec<MultiPoly<Rational>> },
    /// Black-box field.
    Custom { name: String, field: Field },
}

#[derive(Clone)]
pub struct DriftSpec {
    kind: DriftKind,
    declared: Option<DriftBounds<f64>>,
    poly_f64: Option<Vec<MultiPoly<f64>>>,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DriftSpec({})", self.describe())
    }
}

impl DriftSpec {
    pub fn linear(c: Rational) -> Self {
        Self { kind: DriftKind::Linear { c }, declared: None, poly_f64: None }
    }

    pub fn polynomial(field: Vec<MultiPoly<Rational>>, declared: Option<DriftBounds<f64>>) -> Self {
        let poly_f64 = Some(field.iter().map(MultiPoly::to_f64).collect());
        Self { kind: DriftKind::Polynomial { field }, declared, poly_f64 }
    }

    pub fn custom(name: impl Into<String>, field: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static, declared: Option<DriftBounds<f64>>) -> Self {
        Self { kind: DriftKind::Custom { name: name.into(), field: Arc::new(field) }, declared, poly_f64: None }
    }

    pub fn kind(&self) -> &DriftKind {
        &self.kind
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            DriftKind::Linear { c } => format!("linear(c={c})"),
            DriftKind::Polynomial { field } => format!("polynomial[{}]", field.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")),
            DriftKind::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// Coefficient `c` for linear drifts.
    pub fn linear_c(&self) -> Option<f64> {
        match &self.kind {
            DriftKind::Linear { c } => Some(c.to_f64()),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            DriftKind::Linear { c } => {
                let c = Scalar::to_f64(c);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = -c * xi;
                }
            }
            DriftKind::Polynomial { .. } => {
                let ps = self.poly_f64.as_ref().expect("cached");
                for (o, p) in out.iter_mut().zip(ps) {
                    *o = p.eval_f64(x);
                }
            }
            DriftKind::Custom { field, .. } => field(x, out),
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval(x, &mut out);
        out
    }

    /// Polynomial components over `S`, when available.
    pub fn field_poly<S: Scalar>(&self, n: usize) -> Option<Vec<MultiPoly<S>>> {
        match &self.kind {
            DriftKind::Linear { c } => {
                let c = S::from_rational(c).neg();
                Some((0..n).map(|i| MultiPoly::var(i, n).expect("in range").scale(&c)).collect())
            }
            DriftKind::Polynomial { field } => {
                if field.len() != n {
                    return None;
                }
                Some(field.iter().map(|p| p.convert(S::from_rational)).collect())
            }
            DriftKind::Custom { .. } => None,
        }
    }

    /// Bounds for `eta`: analytic for linear drifts, declared otherwise.
    pub fn bounds<S: Scalar>(&self) -> Result<DriftBounds<S>> {
        match (&self.kind, &self.declared) {
            (DriftKind::Linear { c }, _) => {
                let c = S::from_rational(c);
                Ok(DriftBounds { sup_diag: c.neg(), max_offdiag: S::zero(), max_a_alpha_sq: S::from_i64(2).mul(&c).mul(&c) })
            }
            (_, Some(d)) => Ok(DriftBounds {
                sup_diag: S::from_f64_lossy(d.sup_diag),
                max_offdiag: S::from_f64_lossy(d.max_offdiag),
                max_a_alpha_sq: S::from_f64_lossy(d.max_a_alpha_sq),
            }),
            _ => Err(CoreError::InvalidArgument(format!("drift {} has no declared derivative bounds", self.describe()))),
        }
    }

    pub fn declared_bounds(&self) -> Option<&DriftBounds<f64>> {
        self.declared.as_ref()
    }
}

fn audit_err(condition: &str, witness: &[f64], value: f64) -> CoreError {
    CoreError::Audit { condition: condition.into(), witness: witness.to_vec(), value }
}

/// Rate nonnegativity: `2/<a,x>^2 - <b(x),a>/<a,x> >= 0` on every probe.
pub fn audit_gamma_condition(rs: &RootSystem<f64>, drift: &DriftSpec, probes: &[Vec<f64>]) -> Result<()> {
    let roots: Vec<Vec<f64>> = rs.positive_roots().iter().map(|p| p.root.normalized_f64()).collect();
    for x in probes {
        let b = drift.eval_vec(x);
        for a in &roots {
            let ell = dot_f64(a, x);
            if ell == 0.0 {
                continue;
            }
            let v = 2.0 / (ell * ell) - dot_f64(&b, a) / ell;
            if !(v >= -1e-12 * (1.0 + v.abs())) {
                return Err(audit_err("rate nonnegativity 2/<a,x>^2 - <b,a>/<a,x> >= 0", x, v));
            }
        }
    }
    Ok(())
}

/// Equivariance `b(gx) = g b(x)` for every group element on every probe.
pub fn audit_equivariance(rs: &RootSystem<f64>, drift: &DriftSpec, probes: &[Vec<f64>]) -> Result<()> {
    for x in probes {
        let b = drift.eval_vec(x);
        let scale = 1.0 + norm_f64(&b);
        for g in rs.group() {
            let lhs = drift.eval_vec(&g.apply(x));
            let rhs = g.apply(&b);
            let err = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if err > 1e-9 * scale {
                return Err(audit_err("equivariance b(gx) = g b(x)", x, err));
            }
        }
    }
    Ok(())
}

/// Sample-based lower estimates of the quantities in [`DriftBounds`].
pub fn sampled_bounds(rs: &RootSystem<f64>, drift: &DriftSpec, probes: &[Vec<f64>]) -> DriftBounds<f64> {
    let mut out = DriftBounds { sup_diag: f64::NEG_INFINITY, max_offdiag: 0.0, max_a_alpha_sq: 0.0 };
    let n = rs.dim();
    let mut y = vec![0.0; n];
    for x in probes {
        let b = drift.eval_vec(x);
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            y.copy_from_slice(x);
            y[j] += h;
            let bp = drift.eval_vec(&y);
            y[j] -= 2.0 * h;
            let bm = drift.eval_vec(&y);
            for i in 0..n {
                let d = (bp[i] - bm[i]) / (2.0 * h);
                if i == j {
                    out.sup_diag = out.sup_diag.max(d);
                } else {
                    out.max_offdiag = out.max_offdiag.max(d.abs());
                }
            }
        }
        for p in rs.positive_roots() {
            let a = p.root.normalized_f64();
            let ell = dot_f64(&a, x);
            if ell.abs() < 1e-8 {
                continue;
            }
            let bs = drift.eval_vec(&p.root.reflect(x));
            for i in 0..n {
                let v = (b[i] - bs[i]) / ell;
                out.max_a_alpha_sq = out.max_a_alpha_sq.max(v * v);
            }
        }
    }
    out
}

/// Reject declared bounds contradicted by samples.
pub fn audit_declared_bounds(rs: &RootSystem<f64>, drift: &DriftSpec, probes: &[Vec<f64>]) -> Result<()> {
    let Some(d) = drift.declared_bounds() else { return Ok(()) };
    let s = sampled_bounds(rs, drift, probes);
    let tol = |v: f64| 1e-6 * (1.0 + v.abs());
    if s.sup_diag > d.sup_diag + tol(d.sup_diag) {
        return Err(audit_err("declared sup d_i b_i", &[], s.sup_diag));
    }
    if s.max_offdiag > d.max_offdiag + tol(d.max_offdiag) {
        return Err(audit_err("declared max |d_j b_i|", &[], s.max_offdiag));
    }
    if s.max_a_alpha_sq > d.max_a_alpha_sq + tol(d.max_a_alpha_sq) {
        return Err(audit_err("declared max |A_a b|^2", &[], s.max_a_alpha_sq));
    }
    Ok(())
}

/// `sup <x, b(x)> / |x|^2` over probes (must be negative for the Lyapunov route).
pub fn radial_contraction(drift: &DriftSpec, probes: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    for x in probes {
        let r2 = dot_f64(x, x);
        if r2 == 0.0 {
            continue;
        }
        let v = dot_f64(x, &drift.eval_vec(x)) / r2;
        if v > worst.0 {
            worst = (v, x.clone());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::ball_probes;
    use crate::root_system::Family;
    use crate::scalar::ratio;

    #[test]
    fn linear_drift_passes_audits() {
        let rs = RootSystem::<f64>::build_standard(Family::I2(3), 2, &[ratio(1, 4)]).unwrap();
        let d = DriftSpec::linear(ratio(1, 1));
        let probes = ball_probes(&rs, 500, 5.0);
        audit_gamma_condition(&rs, &d, &probes).unwrap();
        audit_equivariance(&rs, &d, &probes).unwrap();
        let s = sampled_bounds(&rs, &d, &probes);
        assert!((s.sup_diag + 1.0).abs() < 1e-6);
        assert!((s.max_a_alpha_sq - 2.0).abs() < 1e-6);
        let (v, _) = radial_contraction(&d, &probes);
        assert!((v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn outward_drift_fails_rate_condition() {
        let rs = RootSystem::<f64>::build_standard(Family::A, 1, &[ratio(1, 4)]).unwrap();
        let d = DriftSpec::custom("outward", |x, out| out[0] = 10.0 * x[0], None);
        let probes = vec![vec![1.0]];
        assert!(matches!(audit_gamma_condition(&rs, &d, &probes), Err(CoreError::Audit { .. })));
    }

    #[test]
    fn non_equivariant_drift_is_rejected() {
        let rs = RootSystem::<f64>::build_standard(Family::A, 1, &[ratio(1, 4)]).unwrap();
        let d = DriftSpec::custom("shift", |x, out| out[0] = -x[0] + 0.5, None);
        assert!(audit_equivariance(&rs, &d, &[vec![1.0]]).is_err());
    }

    #[test]
    fn understated_bounds_are_rejected() {
        let rs = RootSystem::<f64>::build_standard(Family::A, 1, &[ratio(1, 4)]).unwrap();
        let lie = DriftBounds { sup_diag: -3.0, max_offdiag: 0.0, max_a_alpha_sq: 2.0 };
        let d = DriftSpec::custom("lin", |x, out| out[0] = -x[0], Some(lie));
        assert!(audit_declared_bounds(&rs, &d, &[vec![0.5], vec![1.5]]).is_err());
    }
}
