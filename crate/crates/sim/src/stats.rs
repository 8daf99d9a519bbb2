//! Order-independent reductions and small regressions.

use serde::Serialize;

/// Three-valued outcome; `Fail` needs a significant violation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], if n < 2 { f64::NAN } else { 0.0 });
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Column means and covariance of the mean for row-major samples.
pub fn mean_cov(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let cols: Vec<Vec<f64>> = (0..m).map(col).collect();
    let means: Vec<f64> = cols.iter().map(|c| pairwise_sum(c) / n as f64).collect();
    let mut cov = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in a..m {
            let prod: Vec<f64> = cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - means[a]) * (y - means[b])).collect();
            let v = pairwise_sum(&prod) / ((n - 1) as f64 * n as f64);
            cov[a][b] = v;
            cov[b][a] = v;
        }
    }
    (means, cov)
}

/// Weighted least squares line `y = a + b x`; returns `(a, b, se_b)`.
/// Weights are inverse variances; with fewer than three points the slope
/// error comes from the weights alone.
pub fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    let b = (sw * sxy - sx * sy) / det;
    let a = (sy - b * sx) / sw;
    let se_b = (sw / det).sqrt();
    (a, b, se_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn mean_and_error() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let (m, se) = mean_se(&[1.0; 10]);
        assert_eq!((m, se), (1.0, 0.0));
    }

    #[test]
    fn exact_line_is_recovered() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|x| 1.0 - 0.5 * x).collect();
        let (a, b, _) = weighted_line(&x, &y, &[1.0; 4]);
        assert!((a - 1.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
    }

    #[test]
    fn covariance_of_identical_columns() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, i as f64]).collect();
        let (m, c) = mean_cov(&rows);
        assert_eq!(m[0], m[1]);
        assert!((c[0][1] - c[0][0]).abs() < 1e-12);
    }
}
