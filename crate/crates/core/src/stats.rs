//! Small descriptive statistics used by the Monte Carlo harness.

use rand::Rng;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; `None` below two observations.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Unbiased sample covariance of two equally long series.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let s: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(s / (xs.len() - 1) as f64)
}

/// Two-sided Kolmogorov–Smirnov distance `sup |F_n - F|` against a fully
/// specified continuous c.d.f.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS distance.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Covariance matrix of row vectors `rows[r][j]` (one row per replicate).
#[allow(clippy::needless_range_loop)]
pub fn covariance_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = rows.first().map_or(0, Vec::len);
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..dim)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let mut cov = vec![vec![0.0; dim]; dim];
    for r in rows {
        for i in 0..dim {
            let di = r[i] - means[i];
            for j in i..dim {
                cov[i][j] += di * (r[j] - means[j]);
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let c = cov[i][j] / (n - 1.0);
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    cov
}

/// Nonparametric bootstrap standard errors of every covariance entry.
pub fn bootstrap_covariance_se<R: Rng + ?Sized>(
    rows: &[Vec<f64>],
    resamples: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let dim = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    let mut sum = vec![vec![0.0; dim]; dim];
    let mut sum_sq = vec![vec![0.0; dim]; dim];
    let mut draw: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..resamples {
        draw.clear();
        draw.extend((0..n).map(|_| rows[rng.random_range(0..n)].clone()));
        let c = covariance_matrix(&draw);
        for i in 0..dim {
            for j in 0..dim {
                sum[i][j] += c[i][j];
                sum_sq[i][j] += c[i][j] * c[i][j];
            }
        }
    }
    let b = resamples as f64;
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let m = sum[i][j] / b;
                    ((sum_sq[i][j] / b - m * m) * b / (b - 1.0)).max(0.0).sqrt()
                })
                .collect()
        })
        .collect()
}
