//! Dunkl operators, Dunkl Laplacian, carré du champ forms and the gradient
//! constant `eta`, exactly on polynomials and pointwise on black-box functions.
//!
//! For a positive root with direction `v` (normalised root `a = s v`) the
//! divided difference `D_v f = (f - f o sigma) / <v,x>` is the only division
//! needed: `a_i A_a f = v_i D_v f` and `(A_a f)^2 = (|v|^2 / 2) (D_v f)^2`.

use crate::drift::{DriftBounds, DriftSpec};
use crate::error::{CoreError, Result};
use crate::linalg::{dot_f64, Matrix};
use crate::observable::Observable;
use crate::poly::MultiPoly;
use crate::root_system::RootSystem;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianMethod {
    SumOfSquares,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarreMethod {
    Definition,
    ClosedForm,
}

/// Dunkl calculus over a fixed root system.
#[derive(Clone, Copy, Debug)]
pub struct DunklOps<'a, S> {
    rs: &'a RootSystem<S>,
}

impl<'a, S: Scalar> DunklOps<'a, S> {
    pub fn new(rs: &'a RootSystem<S>) -> Self {
        Self { rs }
    }

    pub fn system(&self) -> &'a RootSystem<S> {
        self.rs
    }

    fn n(&self) -> usize {
        self.rs.dim()
    }

    fn check(&self, f: &MultiPoly<S>) -> Result<()> {
        if f.n_vars() != self.n() {
            return Err(CoreError::DimensionMismatch { expected: self.n(), got: f.n_vars() });
        }
        Ok(())
    }

    /// `f - f o sigma_a` for positive root `root`.
    pub fn reflection_difference(&self, f: &MultiPoly<S>, root: usize) -> Result<MultiPoly<S>> {
        Ok(f.sub(&f.compose_linear(&self.rs.positive_roots()[root].reflection)?))
    }

    /// `(f - f o sigma) / <v, x>` with `v` the stored root direction.
    pub fn divided_difference(&self, f: &MultiPoly<S>, root: usize) -> Result<MultiPoly<S>> {
        self.check(f)?;
        let diff = self.reflection_difference(f, root)?;
        diff.divide_by_linear_form(&self.rs.positive_roots()[root].root.dir)
    }

    /// `A_a f = (f - f o sigma_a) / <a, x>` for the normalised root.
    pub fn a_alpha(&self, f: &MultiPoly<S>, root: usize) -> Result<MultiPoly<S>> {
        let r = &self.rs.positive_roots()[root].root;
        let half = r.norm2.div(&S::from_i64(2));
        let s = half.sqrt_exact().ok_or_else(|| CoreError::IrrationalScaling(format!("A_a for root {root} of {}", self.rs.label())))?;
        Ok(self.divided_difference(f, root)?.scale(&s))
    }

    fn divided_differences(&self, f: &MultiPoly<S>) -> Result<Vec<MultiPoly<S>>> {
        (0..self.rs.positive_roots().len()).map(|r| self.divided_difference(f, r)).collect()
    }

    /// Dunkl operator `T_i` (0-based index).
    pub fn dunkl_t(&self, i: usize, f: &MultiPoly<S>) -> Result<MultiPoly<S>> {
        self.check(f)?;
        if i >= self.n() {
            return Err(CoreError::VariableIndex { index: i, n_vars: self.n() });
        }
        let dd = self.divided_differences(f)?;
        Ok(self.t_from_parts(i, f, &dd))
    }

    fn t_from_parts(&self, i: usize, f: &MultiPoly<S>, dd: &[MultiPoly<S>]) -> MultiPoly<S> {
        let mut out = f.partial_derivative(i).expect("index checked");
        for (p, d) in self.rs.positive_roots().iter().zip(dd) {
            let c = p.k.mul(&p.root.dir[i]);
            if !c.is_zero() {
                out = out.add(&d.scale(&c));
            }
        }
        out
    }

    /// Dunkl gradient `(T_1 f, ..., T_N f)`.
    pub fn gradient(&self, f: &MultiPoly<S>) -> Result<Vec<MultiPoly<S>>> {
        self.check(f)?;
        let dd = self.divided_differences(f)?;
        Ok((0..self.n()).map(|i| self.t_from_parts(i, f, &dd)).collect())
    }

    pub fn laplacian(&self, f: &MultiPoly<S>, method: LaplacianMethod) -> Result<MultiPoly<S>> {
        self.check(f)?;
        match method {
            LaplacianMethod::SumOfSquares => {
                let g = self.gradient(f)?;
                let mut out = MultiPoly::zero(self.n());
                for (i, gi) in g.iter().enumerate() {
                    out = out.add(&self.dunkl_t(i, gi)?);
                }
                Ok(out)
            }
            LaplacianMethod::ClosedForm => {
                // Delta f + 2 sum k [ <grad f, v>/<v,x> - (|v|^2/2) (f - f o sigma)/<v,x>^2 ]
                let grad = f.gradient();
                let mut out = f.laplacian();
                let half = S::one().div(&S::from_i64(2));
                for (r, p) in self.rs.positive_roots().iter().enumerate() {
                    if p.k.is_zero() {
                        continue;
                    }
                    let mut dir_grad = MultiPoly::zero(self.n());
                    for (gi, vi) in grad.iter().zip(&p.root.dir) {
                        dir_grad = dir_grad.add(&gi.scale(vi));
                    }
                    let d = self.divided_difference(f, r)?;
                    let num = dir_grad.sub(&d.scale(&p.root.norm2.mul(&half)));
                    let term = num.divide_by_linear_form(&p.root.dir)?;
                    out = out.add(&term.scale(&S::from_i64(2).mul(&p.k)));
                }
                Ok(out)
            }
        }
    }

    /// `T_i(fg) - f T_i g - g T_i f`.
    pub fn leibniz_defect(&self, f: &MultiPoly<S>, g: &MultiPoly<S>, i: usize) -> Result<MultiPoly<S>> {
        let fg = f.mul(g)?;
        Ok(self.dunkl_t(i, &fg)?.sub(&f.mul(&self.dunkl_t(i, g)?)?).sub(&g.mul(&self.dunkl_t(i, f)?)?))
    }

    /// `-sum k a_i (f - f o sigma)(g - g o sigma) / <a,x>`.
    pub fn leibniz_formula(&self, f: &MultiPoly<S>, g: &MultiPoly<S>, i: usize) -> Result<MultiPoly<S>> {
        let mut out = MultiPoly::zero(self.n());
        for (r, p) in self.rs.positive_roots().iter().enumerate() {
            let c = p.k.mul(&p.root.dir[i]);
            if c.is_zero() {
                continue;
            }
            let df = self.reflection_difference(f, r)?;
            let dg = self.divided_difference(g, r)?;
            out = out.sub(&df.mul(&dg)?.scale(&c));
        }
        Ok(out)
    }

    pub fn carre_du_champ(&self, f: &MultiPoly<S>, method: CarreMethod) -> Result<MultiPoly<S>> {
        match method {
            CarreMethod::Definition => {
                let f2 = f.mul(f)?;
                let a = self.laplacian(&f2, LaplacianMethod::SumOfSquares)?;
                let b = f.mul(&self.laplacian(f, LaplacianMethod::SumOfSquares)?)?;
                let half = S::one().div(&S::from_i64(2));
                Ok(a.sub(&b.scale(&S::from_i64(2))).scale(&half))
            }
            CarreMethod::ClosedForm => {
                let mut out = MultiPoly::zero(self.n());
                for g in f.gradient() {
                    out = out.add(&g.mul(&g)?);
                }
                let half = S::one().div(&S::from_i64(2));
                for (r, p) in self.rs.positive_roots().iter().enumerate() {
                    if p.k.is_zero() {
                        continue;
                    }
                    let d = self.divided_difference(f, r)?;
                    out = out.add(&d.mul(&d)?.scale(&p.k.mul(&p.root.norm2).mul(&half)));
                }
                Ok(out)
            }
        }
    }

    /// `L f = Delta_k f + b . grad_k f` for a polynomial drift field.
    pub fn generator(&self, b: &[MultiPoly<S>], f: &MultiPoly<S>) -> Result<MultiPoly<S>> {
        self.check_field(b)?;
        let mut out = self.laplacian(f, LaplacianMethod::SumOfSquares)?;
        for (bi, ti) in b.iter().zip(self.gradient(f)?) {
            out = out.add(&bi.mul(&ti)?);
        }
        Ok(out)
    }

    fn check_field(&self, b: &[MultiPoly<S>]) -> Result<()> {
        if b.len() != self.n() {
            return Err(CoreError::DimensionMismatch { expected: self.n(), got: b.len() });
        }
        for bi in b {
            self.check(bi)?;
        }
        Ok(())
    }

    /// `Delta f + mu . grad f + sum lambda_a (f o sigma_a - f)` assembled per root
    /// over the common denominator `<v,x>^2`, then divided exactly.
    pub fn generator_via_decomposition(&self, b: &[MultiPoly<S>], f: &MultiPoly<S>) -> Result<MultiPoly<S>> {
        self.check_field(b)?;
        let grad = f.gradient();
        let mut out = f.laplacian();
        for (bi, gi) in b.iter().zip(&grad) {
            out = out.add(&bi.mul(gi)?);
        }
        for (r, p) in self.rs.positive_roots().iter().enumerate() {
            if p.k.is_zero() {
                continue;
            }
            let ell = MultiPoly::linear_form(&p.root.dir);
            let mut v_grad = MultiPoly::zero(self.n());
            let mut v_b = MultiPoly::zero(self.n());
            for ((gi, bi), vi) in grad.iter().zip(b).zip(&p.root.dir) {
                v_grad = v_grad.add(&gi.scale(vi));
                v_b = v_b.add(&bi.scale(vi));
            }
            let diff = self.reflection_difference(f, r)?;
            // singular drift: 2k <v, grad f> / ell
            let drift_num = v_grad.mul(&ell)?.scale(&S::from_i64(2).mul(&p.k));
            // jumps: -k (|v|^2/ell^2 - <b,v>/ell) (f - f o sigma)
            let jump_num = diff.scale(&p.k.mul(&p.root.norm2)).neg().add(&v_b.mul(&ell)?.mul(&diff)?.scale(&p.k));
            let num = drift_num.add(&jump_num);
            let q = num.divide_by_linear_form(&p.root.dir)?.divide_by_linear_form(&p.root.dir)?;
            out = out.add(&q);
        }
        Ok(out)
    }

    /// `Gamma_L(h) = |grad h|^2 + 1/2 sum k (h - h o sigma)^2 [2/<a,x>^2 - <a,b>/<a,x>]`.
    pub fn gamma_l(&self, b: &[MultiPoly<S>], h: &MultiPoly<S>, method: CarreMethod) -> Result<MultiPoly<S>> {
        self.check_field(b)?;
        let half = S::one().div(&S::from_i64(2));
        match method {
            CarreMethod::Definition => {
                let h2 = h.mul(h)?;
                let a = self.generator(b, &h2)?;
                let c = h.mul(&self.generator(b, h)?)?;
                Ok(a.sub(&c.scale(&S::from_i64(2))).scale(&half))
            }
            CarreMethod::ClosedForm => {
                let mut out = MultiPoly::zero(self.n());
                for g in h.gradient() {
                    out = out.add(&g.mul(&g)?);
                }
                for (r, p) in self.rs.positive_roots().iter().enumerate() {
                    if p.k.is_zero() {
                        continue;
                    }
                    let diff = self.reflection_difference(h, r)?;
                    let d = diff.divide_by_linear_form(&p.root.dir)?;
                    let mut v_b = MultiPoly::zero(self.n());
                    for (bi, vi) in b.iter().zip(&p.root.dir) {
                        v_b = v_b.add(&bi.scale(vi));
                    }
                    let sq = d.mul(&d)?.scale(&p.root.norm2.mul(&half));
                    let drift = diff.mul(&d)?.mul(&v_b)?.scale(&half);
                    out = out.add(&sq.sub(&drift).scale(&p.k));
                }
                Ok(out)
            }
        }
    }

    /// Dunkl gradient of `f o g` and `g^T (grad_k f) o g`; equal by equivariance.
    pub fn equivariance_sides(&self, f: &MultiPoly<S>, g: &Matrix<S>) -> Result<(Vec<MultiPoly<S>>, Vec<MultiPoly<S>>)> {
        let lhs = self.gradient(&f.compose_linear(g)?)?;
        let grad = self.gradient(f)?;
        let composed: Vec<MultiPoly<S>> = grad.iter().map(|p| p.compose_linear(g)).collect::<Result<_>>()?;
        let n = self.n();
        let rhs = (0..n)
            .map(|i| {
                let mut acc = MultiPoly::zero(n);
                for (j, cj) in composed.iter().enumerate() {
                    acc = acc.add(&cj.scale(g.get(j, i)));
                }
                acc
            })
            .collect();
        Ok((lhs, rhs))
    }
}

/// `eta = sup_i d_i b_i + (N-1) max_{i!=j} |d_j b_i| + sqrt(2) gamma max_a |A_a b|`.
pub fn eta_constant<S: Scalar>(bounds: &DriftBounds<S>, n: usize, gamma: &S) -> Result<S> {
    let two = S::from_i64(2);
    let root = two.mul(&bounds.max_a_alpha_sq).sqrt_exact().ok_or_else(|| CoreError::IrrationalScaling("sqrt(2) |A_a b|".into()))?;
    Ok(bounds.sup_diag.add(&S::from_i64(n as i64 - 1).mul(&bounds.max_offdiag)).add(&gamma.mul(&root)))
}

/// Pointwise Dunkl gradient of a black-box observable.
pub fn dunkl_gradient_at(rs: &RootSystem<f64>, f: &dyn Observable, x: &[f64]) -> Vec<f64> {
    let mut out = f.gradient(x);
    let fx = f.eval(x);
    for p in rs.positive_roots() {
        if p.k == 0.0 {
            continue;
        }
        let ell = dot_f64(&p.root.dir, x);
        let fs = f.eval(&p.root.reflect(x));
        let d = (fx - fs) / ell;
        for (o, v) in out.iter_mut().zip(&p.root.dir) {
            *o += p.k * v * d;
        }
    }
    out
}

/// Symmetrised gradient `sum_g |grad_k f(g x)|^2`.
pub fn symmetrised_gradient(rs: &RootSystem<f64>, f: &dyn Observable, x: &[f64]) -> f64 {
    rs.group()
        .iter()
        .map(|g| {
            let gx = g.apply(x);
            dunkl_gradient_at(rs, f, &gx).iter().map(|v| v * v).sum::<f64>()
        })
        .sum()
}

/// Jump-diffusion form of `L = Delta_k + b . grad_k`.
pub struct GeneratorDecomposition<'a> {
    rs: &'a RootSystem<f64>,
    drift: &'a DriftSpec,
}

impl<'a> GeneratorDecomposition<'a> {
    pub fn new(rs: &'a RootSystem<f64>, drift: &'a DriftSpec) -> Self {
        Self { rs, drift }
    }

    /// Diffusion coefficient per coordinate (noise `sqrt(2) dW`).
    pub fn diffusion_coefficient(&self) -> f64 {
        std::f64::consts::SQRT_2
    }

    /// `mu(x) = b(x) + 2 sum k a / <a,x>`.
    pub fn drift_field(&self, x: &[f64]) -> Vec<f64> {
        let mut mu = vec![0.0; x.len()];
        self.drift.eval(x, &mut mu);
        for p in self.rs.positive_roots() {
            let ell = dot_f64(&p.root.dir, x) * (2.0 / p.root.norm2).sqrt();
            let s = (2.0 / p.root.norm2).sqrt();
            for (m, v) in mu.iter_mut().zip(&p.root.dir) {
                *m += 2.0 * p.k * v * s / ell;
            }
        }
        mu
    }

    /// `lambda_a(x) = k (2/<a,x>^2 - <b(x),a>/<a,x>)`.
    pub fn jump_rates(&self, x: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; x.len()];
        self.drift.eval(x, &mut b);
        self.rs
            .positive_roots()
            .iter()
            .map(|p| {
                let a = p.root.normalized_f64();
                let ell = dot_f64(&a, x);
                p.k * (2.0 / (ell * ell) - dot_f64(&b, &a) / ell)
            })
            .collect()
    }

    pub fn jump_targets(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.rs.positive_roots().iter().map(|p| p.root.reflect(x)).collect()
    }

    /// Rate nonnegativity on probe points; returns the witness on failure.
    pub fn check_rates(&self, probes: &[Vec<f64>]) -> Result<()> {
        for x in probes {
            for r in self.jump_rates(x) {
                if r < -1e-12 * (1.0 + r.abs()) || !r.is_finite() {
                    return Err(CoreError::Audit { condition: "jump rate nonnegativity".into(), witness: x.clone(), value: r });
                }
            }
        }
        Ok(())
    }
}

/// Dunkl weight `w_k(x) = prod |<a,x>|^{2 k_a}`.
pub fn weight(rs: &RootSystem<f64>, x: &[f64]) -> f64 {
    rs.positive_roots()
        .iter()
        .map(|p| {
            let a = p.root.normalized_f64();
            dot_f64(&a, x).abs().powf(2.0 * p.k)
        })
        .product()
}
