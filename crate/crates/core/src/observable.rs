//! Black-box test functions with optional analytic gradients.

use std::sync::Arc;

use crate::poly::MultiPoly;
use crate::scalar::Scalar;

/// Real function on `R^N` used by pointwise operators and Monte Carlo estimators.
pub trait Observable: Send + Sync {
    fn eval(&self, x: &[f64]) -> f64;

    /// Euclidean gradient; default is a central difference.
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = 1e-5 * (1.0 + x[i].abs());
                y[i] = x[i] + h;
                let fp = self.eval(&y);
                y[i] = x[i] - h;
                let fm = self.eval(&y);
                y[i] = x[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    /// `sup |f|` when the function is bounded.
    fn sup_norm(&self) -> Option<f64> {
        None
    }

    fn name(&self) -> String;
}

/// Polynomial observable with exact gradient.
#[derive(Clone, Debug)]
pub struct PolyObservable {
    poly: MultiPoly<f64>,
    grad: Vec<MultiPoly<f64>>,
    label: String,
}

impl PolyObservable {
    pub fn new<S: Scalar>(p: &MultiPoly<S>) -> Self {
        let poly = p.to_f64();
        let grad = poly.gradient();
        Self { label: p.to_string(), poly, grad }
    }

    pub fn poly(&self) -> &MultiPoly<f64> {
        &self.poly
    }
}

impl Observable for PolyObservable {
    fn eval(&self, x: &[f64]) -> f64 {
        self.poly.eval_f64(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval_f64(x)).collect()
    }
    fn sup_norm(&self) -> Option<f64> {
        if self.poly.total_degree() == 0 {
            Some(self.poly.max_abs_coeff())
        } else {
            None
        }
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// `tanh(x_i)`.
#[derive(Clone, Copy, Debug)]
pub struct Tanh {
    pub coord: usize,
}

impl Observable for Tanh {
    fn eval(&self, x: &[f64]) -> f64 {
        x[self.coord].tanh()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        let c = x[self.coord].cosh();
        g[self.coord] = 1.0 / (c * c);
        g
    }
    fn sup_norm(&self) -> Option<f64> {
        Some(1.0)
    }
    fn name(&self) -> String {
        format!("tanh(x{})", self.coord + 1)
    }
}

/// Closure-backed observable.
#[derive(Clone)]
pub struct FnObservable {
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    label: String,
    sup: Option<f64>,
}

impl FnObservable {
    pub fn new(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), label: label.into(), sup: None }
    }

    pub fn bounded(mut self, sup: f64) -> Self {
        self.sup = Some(sup);
        self
    }
}

impl Observable for FnObservable {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn sup_norm(&self) -> Option<f64> {
        self.sup
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// Parse `tanh(xi)` or a polynomial expression.
pub fn parse_observable(s: &str, n_vars: usize) -> crate::Result<Arc<dyn Observable>> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix("tanh(").and_then(|r| r.strip_suffix(')')) {
        let inner = inner.trim();
        let idx = if inner == "x" && n_vars == 1 {
            0
        } else {
            let k: usize = inner
                .strip_prefix('x')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| crate::CoreError::Parse { input: s.into(), reason: "expected tanh(xi)".into() })?;
            if k == 0 || k > n_vars {
                return Err(crate::CoreError::Parse { input: s.into(), reason: "variable out of range".into() });
            }
            k - 1
        };
        return Ok(Arc::new(Tanh { coord: idx }));
    }
    let p: MultiPoly<crate::Rational> = crate::parse_poly(t, n_vars)?;
    Ok(Arc::new(PolyObservable::new(&p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_gradient_matches_analytic() {
        let t = Tanh { coord: 1 };
        let f = FnObservable::new("tanh", |x: &[f64]| x[1].tanh());
        let x = [0.3, -0.8];
        let a = t.gradient(&x);
        let b = f.gradient(&x);
        assert!((a[1] - b[1]).abs() < 1e-9 && b[0].abs() < 1e-12);
    }

    #[test]
    fn parses_observables() {
        assert_eq!(parse_observable("tanh(x2)", 3).unwrap().name(), "tanh(x2)");
        assert!((parse_observable("x1^2 + 1", 2).unwrap().eval(&[2.0, 0.0]) - 5.0).abs() < 1e-15);
        assert!(parse_observable("tanh(x4)", 3).is_err());
    }
}
