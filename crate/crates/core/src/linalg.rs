//! Small dense square matrices over a [`Scalar`] field.

use crate::scalar::{Scalar, ScalarKey};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_rows(n: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data must be n*n");
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![S::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = S::one();
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc = acc.add(&a.mul(o.get(k, j)));
                    }
                }
                data.push(acc);
            }
        }
        Self { n, data }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| {
                let mut acc = S::zero();
                for (j, xj) in x.iter().enumerate() {
                    acc = acc.add(&self.get(i, j).mul(xj));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.get(j, i).clone());
            }
        }
        Self { n, data }
    }

    pub fn key(&self) -> Vec<ScalarKey> {
        self.data.iter().map(Scalar::key).collect()
    }

    pub fn approx_eq(&self, o: &Self) -> bool {
        self.n == o.n && self.data.iter().zip(&o.data).all(|(a, b)| a.approx_eq(b, 1.0))
    }

    pub fn is_orthogonal(&self) -> bool {
        self.transpose().mul(self).approx_eq(&Self::identity(self.n))
    }

    /// If every row holds exactly one entry equal to +-1, return `(column, sign)` per row.
    pub fn signed_permutation(&self) -> Option<Vec<(usize, bool)>> {
        let one = S::one();
        let minus = one.neg();
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut found = None;
            for j in 0..self.n {
                let v = self.get(i, j);
                if v.is_zero() {
                    continue;
                }
                if found.is_some() {
                    return None;
                }
                if *v == one {
                    found = Some((j, true));
                } else if *v == minus {
                    found = Some((j, false));
                } else {
                    return None;
                }
            }
            out.push(found?);
        }
        Some(out)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix { n: self.n, data: self.data.iter().map(Scalar::to_f64).collect() }
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

pub fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_f64(a: &[f64]) -> f64 {
    dot_f64(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_and_product() {
        let m = Matrix::from_rows(2, vec![0.0, -1.0, 1.0, 0.0]);
        assert!(m.is_orthogonal());
        assert!(m.mul(&m.transpose()).approx_eq(&Matrix::identity(2)));
        assert_eq!(m.signed_permutation(), Some(vec![(1, false), (0, true)]));
        assert_eq!(m.apply(&[1.0, 2.0]), vec![-2.0, 1.0]);
    }
}
