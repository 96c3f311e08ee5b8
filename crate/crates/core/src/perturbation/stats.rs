use statrs::distribution::{ContinuousCDF, Normal};

use crate::par::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Two-pass moments with pairwise sums, so results depend only on the
/// order of `xs`.
pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let d: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let pow = |k: i32| pairwise_sum(&d.iter().map(|v| v.powi(k)).collect::<Vec<_>>()) / n;
    let m2 = pow(2);
    let m3 = pow(3);
    let m4 = pow(4);
    Moments {
        mean,
        variance: m2 * n / (n - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}

/// `sup_x |F_n(x) - Φ(x)|`.
pub fn ks_distance_normal(xs: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / n).abs().max((((i + 1) as f64) / n - c).abs())
        })
        .fold(0.0, f64::max)
}
