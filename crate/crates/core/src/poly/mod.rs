//! Sparse multivariate polynomials with exact or floating coefficients.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order
//! (and therefore every derived computation) is deterministic.

mod parse;
pub mod sample;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{CoreError, Result};
use crate::linalg::Matrix;
use crate::scalar::{Scalar, FLOAT_TOL};

pub use parse::parse_poly;

/// Largest total degree any operation may produce.
pub const DEGREE_CAP: u32 = 32;

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, o: &Self) -> Self {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<S> {
    n_vars: usize,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> MultiPoly<S> {
    pub fn zero(n_vars: usize) -> Self {
        Self { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(c: S, n_vars: usize) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(Monomial::one(n_vars), c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(i: usize, n_vars: usize) -> Result<Self> {
        if i >= n_vars {
            return Err(CoreError::VariableIndex { index: i, n_vars });
        }
        let mut m = Monomial::one(n_vars);
        m.0[i] = 1;
        let mut p = Self::zero(n_vars);
        p.add_term(m, S::one());
        Ok(p)
    }

    /// Linear form `sum_i v_i x_i`.
    pub fn linear_form(v: &[S]) -> Self {
        let n = v.len();
        let mut p = Self::zero(n);
        for (i, c) in v.iter().enumerate() {
            let mut m = Monomial::one(n);
            m.0[i] = 1;
            p.add_term(m, c.clone());
        }
        p
    }

    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (Vec<u16>, S)>) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        for (e, c) in terms {
            if e.len() != n_vars {
                return Err(CoreError::DimensionMismatch { expected: n_vars, got: e.len() });
            }
            let m = Monomial(e);
            if m.degree() > DEGREE_CAP {
                return Err(CoreError::DegreeCap { degree: m.degree(), cap: DEGREE_CAP });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, exps: &[u16]) -> S {
        self.terms.get(&Monomial(exps.to_vec())).cloned().unwrap_or_else(S::zero)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// True when every coefficient is zero up to the scalar tolerance.
    pub fn approx_zero(&self, scale: f64) -> bool {
        self.terms.values().all(|c| c.approx_zero(scale))
    }

    fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_negligible() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_negligible() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_vars(&self, o: &Self) {
        assert_eq!(self.n_vars, o.n_vars, "polynomials live in different rings");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_vars(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check_vars(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { n_vars: self.n_vars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n_vars);
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul(s));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_vars(o);
        let mut out = Self::zero(self.n_vars);
        if self.is_zero() || o.is_zero() {
            return Ok(out);
        }
        let degree = self.total_degree() + o.total_degree();
        if degree > DEGREE_CAP {
            return Err(CoreError::DegreeCap { degree, cap: DEGREE_CAP });
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::constant(S::one(), self.n_vars);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn partial_derivative(&self, i: usize) -> Result<Self> {
        if i >= self.n_vars {
            return Err(CoreError::VariableIndex { index: i, n_vars: self.n_vars });
        }
        let mut out = Self::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            out.add_term(m2, c.mul(&S::from_i64(e as i64)));
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.n_vars).map(|i| self.partial_derivative(i).expect("index in range")).collect()
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n_vars);
        for i in 0..self.n_vars {
            let d = self.partial_derivative(i).expect("index in range");
            out = out.add(&d.partial_derivative(i).expect("index in range"));
        }
        out
    }

    pub fn eval(&self, x: &[S]) -> Result<S> {
        if x.len() != self.n_vars {
            return Err(CoreError::DimensionMismatch { expected: self.n_vars, got: x.len() });
        }
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t = t.mul(&xi.pow_u(e as u32));
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Floating evaluation regardless of the coefficient field.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_vars);
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= xi.powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// The polynomial `x -> f(M x)`.
    pub fn compose_linear(&self, m: &Matrix<S>) -> Result<Self> {
        if m.dim() != self.n_vars {
            return Err(CoreError::DimensionMismatch { expected: self.n_vars, got: m.dim() });
        }
        let n = self.n_vars;
        if let Some(perm) = m.signed_permutation() {
            let mut out = Self::zero(n);
            for (mono, c) in &self.terms {
                let mut e2 = vec![0u16; n];
                let mut negative = false;
                for (i, &e) in mono.0.iter().enumerate() {
                    let (j, positive) = perm[i];
                    e2[j] += e;
                    if !positive && e % 2 == 1 {
                        negative = !negative;
                    }
                }
                let c2 = if negative { c.neg() } else { c.clone() };
                out.add_term(Monomial(e2), c2);
            }
            return Ok(out);
        }
        let rows: Vec<Self> = (0..n)
            .map(|i| Self::linear_form(&(0..n).map(|j| m.get(i, j).clone()).collect::<Vec<_>>()))
            .collect();
        let mut powers: Vec<Vec<Self>> = rows.iter().map(|r| vec![Self::constant(S::one(), n), r.clone()]).collect();
        let mut out = Self::zero(n);
        for (mono, c) in &self.terms {
            let mut t = Self::constant(c.clone(), n);
            for (i, &e) in mono.0.iter().enumerate() {
                let e = e as usize;
                while powers[i].len() <= e {
                    let next = powers[i].last().expect("nonempty").mul(&rows[i])?;
                    powers[i].push(next);
                }
                if e > 0 {
                    t = t.mul(&powers[i][e])?;
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Exact quotient of `self` by `<v, x>`; fails when the remainder is nonzero.
    pub fn divide_by_linear_form(&self, v: &[S]) -> Result<Self> {
        let n = self.n_vars;
        if v.len() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: v.len() });
        }
        let mut p = None;
        let mut best = 0.0;
        for (i, c) in v.iter().enumerate() {
            let a = c.to_f64().abs();
            if !c.is_zero() && (p.is_none() || a > best) {
                p = Some(i);
                best = a;
            }
        }
        let p = p.ok_or(CoreError::ZeroLinearForm)?;
        if self.is_zero() {
            return Ok(Self::zero(n));
        }
        // Coefficients a_d in the pivot variable.
        let mut slices: BTreeMap<u16, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let d = m2.0[p];
            m2.0[p] = 0;
            slices.entry(d).or_insert_with(|| Self::zero(n)).add_term(m2, c.clone());
        }
        let top = *slices.keys().next_back().expect("nonzero polynomial");
        let vp = &v[p];
        let mut r_coeffs: Vec<S> = v.iter().map(|c| c.div(vp).neg()).collect();
        r_coeffs[p] = S::zero();
        let r = Self::linear_form(&r_coeffs);
        let zero = Self::zero(n);
        let a = |d: u16| slices.get(&d).unwrap_or(&zero).clone();
        if top == 0 {
            return Err(CoreError::NotDivisible { remainder: self.max_abs_coeff() });
        }
        let mut b = vec![Self::zero(n); top as usize];
        b[top as usize - 1] = a(top);
        for d in (1..top).rev() {
            b[d as usize - 1] = a(d).add(&r.mul(&b[d as usize])?);
        }
        let remainder = a(0).add(&r.mul(&b[0])?);
        let scale = self.max_abs_coeff();
        let ok = if S::EXACT { remainder.is_zero() } else { remainder.max_abs_coeff() <= FLOAT_TOL * scale.max(1.0) };
        if !ok {
            return Err(CoreError::NotDivisible { remainder: remainder.max_abs_coeff() });
        }
        let inv = S::one().div(vp);
        let mut q = Self::zero(n);
        for (d, bd) in b.iter().enumerate() {
            for (m, c) in &bd.terms {
                let mut m2 = m.clone();
                m2.0[p] = d as u16;
                q.add_term(m2, c.mul(&inv));
            }
        }
        Ok(q)
    }

    pub fn to_f64(&self) -> MultiPoly<f64> {
        let mut out = MultiPoly::<f64>::zero(self.n_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.to_f64());
        }
        out
    }

    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MultiPoly<T> {
        let mut out = MultiPoly::<T>::zero(self.n_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }
}

impl<S: Scalar> fmt::Display for MultiPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| b.cmp(a)));
        for (idx, (m, c)) in terms.into_iter().enumerate() {
            let negative = *c < S::zero();
            let mag = if negative { c.neg() } else { c.clone() };
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == S::one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn p(s: &str, n: usize) -> MultiPoly<Rational> {
        parse_poly(s, n).unwrap()
    }

    #[test]
    fn arithmetic_and_display() {
        let f = p("2*x1^2*x2 - 1/3*x3", 3);
        assert_eq!(f.to_string(), "2*x1^2*x2 - 1/3*x3");
        let g = f.sub(&f);
        assert!(g.is_zero());
        assert_eq!(f.total_degree(), 3);
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.total_degree(), 6);
    }

    #[test]
    fn division_by_linear_form() {
        let f = p("x1^2 - x2^2", 2);
        let q = f.divide_by_linear_form(&[ratio(1, 1), ratio(-1, 1)]).unwrap();
        assert_eq!(q, p("x1 + x2", 2));
        let g = p("x1^2 + x2^2", 2);
        assert!(matches!(g.divide_by_linear_form(&[ratio(1, 1), ratio(-1, 1)]), Err(CoreError::NotDivisible { .. })));
    }

    #[test]
    fn derivative_and_eval() {
        let f = p("x1^3*x2 + 5", 2);
        assert_eq!(f.partial_derivative(0).unwrap(), p("3*x1^2*x2", 2));
        assert_eq!(f.eval(&[ratio(2, 1), ratio(1, 2)]).unwrap(), ratio(9, 1));
        assert!(f.partial_derivative(2).is_err());
    }

    #[test]
    fn degree_cap_enforced() {
        let f = p("x1^20", 1);
        assert!(matches!(f.mul(&f), Err(CoreError::DegreeCap { .. })));
    }

    #[test]
    fn compose_with_swap_and_general_matrix() {
        let f = p("x1^2*x2 - x2", 2);
        let swap = Matrix::from_rows(2, vec![ratio(0, 1), ratio(-1, 1), ratio(1, 1), ratio(0, 1)]);
        // (M x) = (-x2, x1)
        assert_eq!(f.compose_linear(&swap).unwrap(), p("x2^2*x1 - x1", 2));
        let shear = Matrix::from_rows(2, vec![ratio(1, 1), ratio(1, 1), ratio(0, 1), ratio(1, 1)]);
        assert_eq!(f.compose_linear(&shear).unwrap(), p("(x1 + x2)^2*x2 - x2", 2));
    }
}
