#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n - 1` denominator.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Standard error of the mean of `a[i] - b[i]`.
pub fn paired_se(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    std_dev(&d) / (d.len() as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level 0.01.
pub fn ks_critical_001(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Percentile bootstrap 95% interval of `stat` over jointly resampled
/// run indices.
pub fn bootstrap_ci(
    columns: &[&[f64]],
    stat: impl Fn(&[Vec<f64>]) -> f64,
    reps: usize,
    seed: u64,
) -> (f64, f64) {
    let n = columns[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(reps);
    let mut buf: Vec<Vec<f64>> = columns.iter().map(|_| vec![0.0; n]).collect();
    for _ in 0..reps {
        for k in 0..n {
            let idx = rng.random_range(0..n);
            for (c, col) in columns.iter().enumerate() {
                buf[c][k] = col[idx];
            }
        }
        stats.push(stat(&buf));
    }
    stats.sort_by(f64::total_cmp);
    let lo = stats[(0.025 * reps as f64) as usize];
    let hi = stats[((0.975 * reps as f64) as usize).min(reps - 1)];
    (lo, hi)
}
