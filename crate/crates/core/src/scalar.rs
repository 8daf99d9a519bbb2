//! Scalar field abstraction shared by exact rational and floating arithmetic.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Absolute tolerance used by floating comparisons.
pub const FLOAT_TOL: f64 = 1e-10;

/// Coefficients below this magnitude are dropped from floating polynomials.
pub const FLOAT_PRUNE: f64 = 1e-14;

/// Hashable key for a scalar, used for group element lookup.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ScalarKey {
    Rounded(i64),
    Exact(Rational),
}

/// Field operations needed by the polynomial engine and Dunkl calculus.
pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Send + Sync + 'static
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Division; callers guarantee a nonzero divisor.
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;

    /// Exact zero (storage invariant).
    fn is_zero(&self) -> bool;
    /// Coefficient small enough to be dropped from storage.
    fn is_negligible(&self) -> bool;
    /// Zero up to the comparison tolerance, relative to `scale`.
    fn approx_zero(&self, scale: f64) -> bool;
    /// Square root when it lies in the field (perfect squares for rationals).
    fn sqrt_exact(&self) -> Option<Self>;
    fn key(&self) -> ScalarKey;

    fn approx_eq(&self, o: &Self, scale: f64) -> bool {
        self.sub(o).approx_zero(scale)
    }

    fn pow_u(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    fn from_f64_lossy(v: f64) -> Self;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negligible(&self) -> bool {
        Zero::is_zero(self)
    }
    fn approx_zero(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Some(Rational::new(rn, rd))
        } else {
            None
        }
    }
    fn key(&self) -> ScalarKey {
        ScalarKey::Exact(self.clone())
    }
    fn from_f64_lossy(v: f64) -> Self {
        Rational::from_f64(v).unwrap_or_else(Zero::zero)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_negligible(&self) -> bool {
        f64::abs(*self) < FLOAT_PRUNE
    }
    fn approx_zero(&self, scale: f64) -> bool {
        f64::abs(*self) <= FLOAT_TOL * scale.max(1.0)
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if *self < -FLOAT_TOL {
            None
        } else {
            Some(self.max(0.0).sqrt())
        }
    }
    fn key(&self) -> ScalarKey {
        // 12 significant decimals after the point; -0.0 and 0.0 collapse.
        let r = (self * 1e12).round() as i64;
        ScalarKey::Rounded(r)
    }
    fn from_f64_lossy(v: f64) -> Self {
        v
    }
}

/// Parse an exact rational from `"3"`, `"-1/3"`, `"0.25"` or `"1e-3"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((a, b)) = s.split_once('/') {
        let num = parse_rational(a)?;
        let den = parse_rational(b)?;
        if Zero::is_zero(&den) {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = Rational::from_integer(n);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -q } else { q })
}

/// Exact rational from an f64 (every finite double is a dyadic rational).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_f64(v)
}

/// Shorthand for building a rational `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
