//! Random polynomials with small rational coefficients.

use rand::Rng;

use super::MultiPoly;
use crate::scalar::{ratio, Rational, Scalar};

/// Random polynomial with `n_terms` monomials of total degree at most `max_degree`.
/// Coefficients are `p/q` with `|p| <= 9`, `1 <= q <= 4`.
pub fn random_poly<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n_vars: usize, max_degree: u32, n_terms: usize) -> MultiPoly<S> {
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let deg = rng.random_range(0..=max_degree);
        let mut e = vec![0u16; n_vars];
        for _ in 0..deg {
            e[rng.random_range(0..n_vars)] += 1;
        }
        let mut num = rng.random_range(-9i64..=9);
        if num == 0 {
            num = 1;
        }
        let den = rng.random_range(1i64..=4);
        terms.push((e, S::from_rational(&ratio(num, den))));
    }
    MultiPoly::from_terms(n_vars, terms).expect("degree below cap")
}

/// Convenience alias for exact random polynomials.
pub fn random_rational_poly<R: Rng + ?Sized>(rng: &mut R, n_vars: usize, max_degree: u32, n_terms: usize) -> MultiPoly<Rational> {
    random_poly(rng, n_vars, max_degree, n_terms)
}
