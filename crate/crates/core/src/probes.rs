//! Deterministic probe sets: Halton points in a ball plus points near the
//! reflecting hyperplanes.

use crate::linalg::dot_f64;
use crate::root_system::RootSystem;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u32) -> f64 {
    let b = b as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `i`-th Halton point in `[0,1)^n` (skips the origin).
pub fn halton(i: u64, n: usize) -> Vec<f64> {
    (0..n).map(|d| radical_inverse(i + 1, PRIMES[d % PRIMES.len()])).collect()
}

/// `count` quasi-random points of the ball of radius `radius` in `R^n`,
/// by rejection from the cube.
pub fn ball_points(n: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let u = halton(i, n);
        i += 1;
        let x: Vec<f64> = u.iter().map(|v| radius * (2.0 * v - 1.0)).collect();
        if dot_f64(&x, &x) <= radius * radius {
            out.push(x);
        }
    }
    out
}

/// Points at distance `dist` from each reflecting hyperplane (both sides).
pub fn near_hyperplane_points(rs: &RootSystem<f64>, per_root: usize, radius: f64, dist: f64) -> Vec<Vec<f64>> {
    let base = ball_points(rs.dim(), per_root, radius);
    let mut out = Vec::new();
    for p in rs.positive_roots() {
        let a = p.root.normalized_f64();
        for x in &base {
            let t = dot_f64(&a, x) / 2.0;
            let on: Vec<f64> = x.iter().zip(&a).map(|(xi, ai)| xi - t * ai).collect();
            for s in [1.0, -1.0] {
                out.push(on.iter().zip(&a).map(|(o, ai)| o + s * dist * ai / std::f64::consts::SQRT_2).collect());
            }
        }
    }
    out
}

fn off_walls(rs: &RootSystem<f64>, x: &[f64]) -> bool {
    rs.positive_roots().iter().all(|p| dot_f64(&p.root.dir, x).abs() > 1e-9)
}

/// Ball points with every point lying on a hyperplane removed.
pub fn ball_probes(rs: &RootSystem<f64>, count: usize, radius: f64) -> Vec<Vec<f64>> {
    ball_points(rs.dim(), count, radius).into_iter().filter(|x| off_walls(rs, x)).collect()
}

/// Default audit probe set: `count` ball points of radius 20 plus
/// near-hyperplane points at distance `1e-3`.
pub fn default_probes(rs: &RootSystem<f64>, count: usize) -> Vec<Vec<f64>> {
    let mut out = ball_probes(rs, count, 20.0);
    // A point near one wall may sit exactly on another.
    out.extend(near_hyperplane_points(rs, (count / 100).max(4), 20.0, 1e-3).into_iter().filter(|x| off_walls(rs, x)));
    out
}
