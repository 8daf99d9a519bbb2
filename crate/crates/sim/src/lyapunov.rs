//! Smooth cutoff `chi` and the radial Lyapunov function `rho(x) = |x| chi(|x|)`.

use serde::{Deserialize, Serialize};

fn psi(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / s).exp();
    let s2 = s * s;
    (e, e / s2, e * (1.0 / (s2 * s2) - 2.0 / (s2 * s)))
}

/// `chi(t) = psi(t-1) / (psi(t-1) + psi(2-t))` with `psi(s) = exp(-1/s)`;
/// returns `(chi, chi', chi'')`.
pub fn chi(t: f64) -> (f64, f64, f64) {
    if t <= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 2.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, a1, a2) = psi(t - 1.0);
    let (b, b1, b2) = psi(2.0 - t);
    let (b1, b2) = (-b1, b2);
    let d = a + b;
    let num = a1 * b - a * b1;
    let d1 = a1 + b1;
    let num1 = a2 * b - a * b2;
    (a / d, num / (d * d), (num1 * d - 2.0 * num * d1) / (d * d * d))
}

/// Radial profile `F(r) = r chi(r)` with first and second derivatives.
pub fn rho_radial(r: f64) -> (f64, f64, f64) {
    let (c, c1, c2) = chi(r);
    (r * c, c + r * c1, 2.0 * c1 + r * c2)
}

pub fn rho(x: &[f64]) -> f64 {
    rho_radial(x.iter().map(|v| v * v).sum::<f64>().sqrt()).0
}

/// `L rho(x) = F'' + (N - 1 + 2 gamma) F'/r + F' <b(x), x>/r`.
pub fn l_rho(x: &[f64], b: &[f64], gamma: f64) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r <= 1.0 {
        return 0.0;
    }
    let (_, f1, f2) = rho_radial(r);
    let n = x.len() as f64;
    let bx: f64 = x.iter().zip(b).map(|(x, b)| x * b).sum();
    f2 + (n - 1.0 + 2.0 * gamma) * f1 / r + f1 * bx / r
}

/// Constants of a Lyapunov inequality `L rho <= C1 - C2 rho`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpec {
    pub c2: f64,
    /// Largest radius of the radial grid.
    pub r_max: f64,
    pub n_radii: usize,
}

impl Default for LyapunovSpec {
    fn default() -> Self {
        Self { c2: 0.5, r_max: 50.0, n_radii: 501 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape_and_derivatives() {
        assert_eq!(chi(0.5).0, 0.0);
        assert_eq!(chi(2.5).0, 1.0);
        assert!((chi(1.5).0 - 0.5).abs() < 1e-15);
        let h = 1e-5;
        for &t in &[1.1, 1.3, 1.5, 1.8, 1.95] {
            let (_, d1, d2) = chi(t);
            let fd1 = (chi(t + h).0 - chi(t - h).0) / (2.0 * h);
            let fd2 = (chi(t + h).1 - chi(t - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6, "{t}: {d1} {fd1}");
            assert!((d2 - fd2).abs() < 1e-5, "{t}: {d2} {fd2}");
            assert!((0.0..=1.0).contains(&chi(t).0));
        }
    }

    #[test]
    fn radial_generator_outside_cutoff() {
        // |x| >= 2: L rho = (N + 2 gamma - 1)/|x| - c |x| for b = -c x
        let x = [3.0, 4.0];
        let b = [-3.0, -4.0];
        let v = l_rho(&x, &b, 0.25);
        assert!((v - ((2.0 + 0.5 - 1.0) / 5.0 - 5.0)).abs() < 1e-12);
        assert_eq!(l_rho(&[0.5, 0.1], &[0.0, 0.0], 0.25), 0.0);
    }
}
