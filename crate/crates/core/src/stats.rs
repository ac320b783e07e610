//! Small numerical helpers shared by the estimation modules.

use statrs::distribution::{ContinuousCDF, Normal};

/// True when the spread is negligible relative to the magnitude, so that
/// sample moments are rounding noise.
pub fn is_effectively_constant(x: &[f64]) -> bool {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let scale = lo.abs().max(hi.abs());
    hi - lo <= 1e-12 * scale
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Central moment of order `k` with the `n` denominator.
pub fn central_moment(x: &[f64], k: i32) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(k)).sum::<f64>() / x.len() as f64
}

/// Quantile by linear interpolation between order statistics of a sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sort_f64(x: &mut [f64]) {
    x.sort_by(|a, b| a.total_cmp(b));
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Sample autocorrelation at lags `1..=max_lag` (n denominator, mean removed).
pub fn autocorrelations(x: &[f64], max_lag: usize) -> Vec<f64> {
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    (1..=max_lag)
        .map(|k| {
            let ck: f64 = d[k..].iter().zip(&d[..d.len() - k]).map(|(a, b)| a * b).sum();
            ck / c0
        })
        .collect()
}

/// One-sample Kolmogorov-Smirnov distance between the empirical CDF of `x`
/// and a continuous `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> f64 {
    let mut s = x.to_vec();
    sort_f64(&mut s);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    sort_f64(&mut a);
    sort_f64(&mut b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic 5% critical value of the one-sample KS test with known parameters.
pub fn ks_critical_5pct(n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    1.358 / (sn + 0.12 + 0.11 / sn)
}

/// 5% critical value for the KS normality test when mean and variance are
/// estimated from the sample (Lilliefors, Stephens' modification).
pub fn lilliefors_critical_5pct(n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    0.895 / (sn - 0.01 + 0.85 / sn)
}

/// 5% critical value of the two-sample KS test.
pub fn ks_two_sample_critical_5pct(na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    1.358 * ((na + nb) / (na * nb)).sqrt()
}

/// Ordinary least squares fit.
#[derive(Debug, Clone)]
pub struct Ols {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub nobs: usize,
}

/// Fits `y = X b + e` where `x` holds the rows of the design matrix.
/// Returns `None` when `X'X` is not positive definite.
pub fn ols(x: &[Vec<f64>], y: &[f64]) -> Option<Ols> {
    let n = y.len();
    let k = x.first()?.len();
    if n <= k {
        return None;
    }
    let mut xtx = vec![0.0; k * k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in x.iter().zip(y) {
        for a in 0..k {
            xty[a] += row[a] * yi;
            for b in 0..=a {
                xtx[a * k + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            xtx[b * k + a] = xtx[a * k + b];
        }
    }
    let chol = cholesky(&xtx, k)?;
    let coef = chol_solve(&chol, k, &xty);
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| yi - row.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let s2 = rss / (n - k) as f64;
    let se = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            let col = chol_solve(&chol, k, &e);
            (col[j] * s2).sqrt()
        })
        .collect();
    Some(Ols {
        coef,
        se,
        residuals,
        rss,
        nobs: n,
    })
}

/// Lower-triangular Cholesky factor of a row-major `k x k` matrix.
pub(crate) fn cholesky(a: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                // Relative pivot floor: rank deficiency shows up as round-off.
                if s <= 1e-12 * a[i * k + i].abs() || !s.is_finite() {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    Some(l)
}

pub(crate) fn chol_solve(l: &[f64], k: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; k];
    for i in 0..k {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * k + p] * z[p];
        }
        z[i] = s / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = z[i];
        for p in i + 1..k {
            s -= l[p * k + i] * x[p];
        }
        x[i] = s / l[i * k + i];
    }
    x
}

/// Inverse of a symmetric positive definite matrix (row-major).
pub(crate) fn spd_inverse(a: &[f64], k: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, k)?;
    let mut inv = vec![0.0; k * k];
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let col = chol_solve(&l, k, &e);
        for i in 0..k {
            inv[i * k + j] = col[i];
        }
    }
    Some(inv)
}
