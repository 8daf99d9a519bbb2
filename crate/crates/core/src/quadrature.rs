//! Double-exponential (tanh-sinh) quadrature and Gaussian-damped integrals
//! against the Dunkl weight in one and two dimensions.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::calculus::weight;
use crate::error::{CoreError, Result};
use crate::root_system::RootSystem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const T_MAX: f64 = 4.0;
const MAX_LEVEL: u32 = 11;

/// Tanh-sinh integration of `f` over `[a, b]`, halving the step until two
/// successive levels agree to `max(abs_tol, rel_tol |I|)`.
/// Endpoint singularities are never evaluated.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(CoreError::Quadrature("infinite interval".into()));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let hw = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut evaluations = 0usize;
    // Contribution of the node pair at +-t (or the centre when t = 0).
    let mut pair = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu) * hw;
        if t == 0.0 {
            evaluations += 1;
            let v = f(mid) * w;
            return if v.is_finite() { Ok(v) } else { Err(CoreError::Quadrature("non-finite integrand at centre".into())) };
        }
        // distance from the endpoint in units of hw: 1 - tanh(u)
        let delta = 2.0 / ((2.0 * u).exp() + 1.0);
        let mut s = 0.0;
        for x in [hi - hw * delta, lo + hw * delta] {
            if x <= lo || x >= hi || w == 0.0 {
                continue;
            }
            evaluations += 1;
            let v = f(x) * w;
            if !v.is_finite() {
                return Err(CoreError::Quadrature(format!("non-finite integrand near x = {x}")));
            }
            s += v;
        }
        Ok(s)
    };
    let mut h = 1.0;
    let mut sum = pair(0.0)?;
    let mut j = 1;
    while j as f64 * h <= T_MAX {
        sum += pair(j as f64 * h)?;
        j += 1;
    }
    let mut prev = sum * h;
    let mut prev_err = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut j = 1;
        while j as f64 * h <= T_MAX {
            sum += pair(j as f64 * h)?;
            j += 2;
        }
        let cur = sum * h;
        let err = (cur - prev).abs();
        if level >= 3 && err <= abs_tol.max(rel_tol * cur.abs()) && prev_err.is_finite() {
            return Ok(Integral { value: sign * cur, error: err, evaluations });
        }
        prev_err = err;
        prev = cur;
    }
    Err(CoreError::Quadrature(format!("refinement did not converge on [{lo}, {hi}] (last change {prev_err:.3e}, value {prev:.6e})")))
}

fn truncation_radius(c: f64) -> f64 {
    // exp(-c R^2 / 2) = 1e-32
    (2.0 * 73.7 / c).sqrt()
}

/// `int f(x) exp(-c|x|^2/2) w_k(x) dx` over `R^N` for `N <= 2`.
///
/// `N = 1` splits at the wall; `N = 2` uses polar coordinates with angular
/// breakpoints on every reflecting line.
pub fn gaussian_weighted_integral(rs: &RootSystem<f64>, c: f64, f: &dyn Fn(&[f64]) -> f64, tol: f64) -> Result<Integral> {
    if !(c > 0.0) {
        return Err(CoreError::Quadrature("Gaussian damping c > 0 required; bare Dunkl measure integrals are not finite".into()));
    }
    let r_max = truncation_radius(c);
    let integrand = |x: &[f64]| f(x) * (-0.5 * c * (x.iter().map(|v| v * v).sum::<f64>())).exp() * weight(rs, x);
    match rs.dim() {
        1 => {
            let left = tanh_sinh(|t| integrand(&[t]), -r_max, 0.0, tol, 1e-14)?;
            let right = tanh_sinh(|t| integrand(&[t]), 0.0, r_max, tol, 1e-14)?;
            Ok(Integral { value: left.value + right.value, error: left.error + right.error, evaluations: left.evaluations + right.evaluations })
        }
        2 => {
            // Walls as (angle, root index); <a, u(th)> = sqrt(2) sin(th - wall angle).
            let mut walls: Vec<(f64, usize)> = Vec::new();
            for (idx, p) in rs.positive_roots().iter().enumerate() {
                let a = p.root.normalized_f64();
                let th = (-a[0]).atan2(a[1]).rem_euclid(PI);
                walls.push((th, idx));
                walls.push((th + PI, idx));
            }
            walls.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite angles"));
            if walls.is_empty() {
                walls.push((0.0, usize::MAX));
            }
            let ks: Vec<f64> = rs.positive_roots().iter().map(|p| p.k).collect();
            let gamma = *rs.gamma();
            // Angular weight with the factor of root `near` evaluated from the exact offset `delta`.
            let angular = |th: f64, near: usize, delta: f64| -> f64 {
                let mut w = 1.0;
                for (idx, &k) in ks.iter().enumerate() {
                    if k == 0.0 {
                        continue;
                    }
                    let s = if idx == near {
                        delta.sin()
                    } else {
                        let wall = walls.iter().find(|w| w.1 == idx).expect("wall").0;
                        (th - wall).sin()
                    };
                    w *= (std::f64::consts::SQRT_2 * s.abs()).powf(2.0 * k);
                }
                w
            };
            let err_cell = std::cell::RefCell::new(None);
            let radial = |th: f64| -> f64 {
                let (s, co) = th.sin_cos();
                let g = |r: f64| {
                    let x = [r * co, r * s];
                    f(&x) * (-0.5 * c * r * r).exp() * r.powf(1.0 + 2.0 * gamma)
                };
                match tanh_sinh(g, 0.0, r_max, tol * 1e-2, 1e-13) {
                    Ok(v) => v.value,
                    Err(e) => {
                        err_cell.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            };
            let mut total = Integral { value: 0.0, error: 0.0, evaluations: 0 };
            for (i, &(th0, r0)) in walls.iter().enumerate() {
                let (th1, r1) = if i + 1 < walls.len() { walls[i + 1] } else { (walls[0].0 + 2.0 * PI, walls[0].1) };
                let half = 0.5 * (th1 - th0);
                let left = tanh_sinh(|d| radial(th0 + d) * angular(th0 + d, r0, d), 0.0, half, 0.5 * tol, 1e-10)?;
                let right = tanh_sinh(|d| radial(th1 - d) * angular(th1 - d, r1, -d), 0.0, half, 0.5 * tol, 1e-10)?;
                if let Some(e) = err_cell.borrow_mut().take() {
                    return Err(e);
                }
                total.value += left.value + right.value;
                total.error += left.error + right.error;
                total.evaluations += left.evaluations + right.evaluations;
            }
            Ok(total)
        }
        n => Err(CoreError::Quadrature(format!("quadrature supports N <= 2, got N = {n}"))),
    }
}

/// Mean of `f` under `exp(-c|x|^2/2) w_k(x) dx` (normalised).
pub fn gaussian_weighted_mean(rs: &RootSystem<f64>, c: f64, f: &dyn Fn(&[f64]) -> f64, tol: f64) -> Result<f64> {
    let z = gaussian_weighted_integral(rs, c, &|_x: &[f64]| 1.0, tol)?;
    let num = gaussian_weighted_integral(rs, c, f, tol)?;
    Ok(num.value / z.value)
}
