//! Augmented Dickey-Fuller and Phillips-Perron unit-root tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{self, Ols};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitRootTest {
    Adf,
    PpZt,
    PpZrho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    #[default]
    Constant,
    ConstantTrend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    pub test_kind: UnitRootTest,
    pub statistic: f64,
    /// Augmentation lags for ADF, Bartlett bandwidth for PP.
    pub lags_or_bandwidth: usize,
    pub deterministic_spec: Deterministic,
    pub nobs: usize,
    pub critical_value_5pct: f64,
    pub reject_5pct: bool,
    pub critical_value_source: String,
}

pub const ADF_CV_SOURCE: &str = "MacKinnon (2010) response surface, 5% level";
pub const ZRHO_CV_SOURCE: &str = "Fuller (1976) Table 10.A.1, 5% level, interpolated in 1/T";

/// Default ADF lag cap, `floor(12 (n/100)^(1/4))`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Newey-West bandwidth `floor(4 (n/100)^(2/9))`.
pub fn pp_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// 5% critical value of the Dickey-Fuller t statistic for sample size `nobs`.
pub fn adf_critical_5pct(spec: Deterministic, nobs: usize) -> f64 {
    let t = nobs as f64;
    let (b0, b1, b2, b3) = match spec {
        Deterministic::Constant => (-2.86154, -2.8903, -4.234, -40.040),
        Deterministic::ConstantTrend => (-3.41049, -4.3904, -9.036, -45.374),
    };
    b0 + b1 / t + b2 / (t * t) + b3 / (t * t * t)
}

/// 5% critical value of the normalized-bias statistic `T(rho - 1)`.
pub fn zrho_critical_5pct(spec: Deterministic, nobs: usize) -> f64 {
    const SIZES: [f64; 5] = [25.0, 50.0, 100.0, 250.0, 500.0];
    let values: [f64; 6] = match spec {
        Deterministic::Constant => [-12.5, -13.3, -13.7, -14.0, -14.0, -14.1],
        Deterministic::ConstantTrend => [-17.9, -19.8, -20.7, -21.3, -21.5, -21.8],
    };
    let inv = 1.0 / (nobs.max(1) as f64);
    // Knots in increasing 1/T: infinity first.
    let knots: Vec<(f64, f64)> = std::iter::once((0.0, values[5]))
        .chain(SIZES.iter().rev().zip(values[..5].iter().rev()).map(|(s, v)| (1.0 / s, *v)))
        .collect();
    if inv >= knots[knots.len() - 1].0 {
        return knots[knots.len() - 1].1;
    }
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if inv <= x1 {
            return y0 + (inv - x0) / (x1 - x0) * (y1 - y0);
        }
    }
    values[5]
}

fn deterministic_cols(spec: Deterministic, t: usize) -> Vec<f64> {
    match spec {
        Deterministic::Constant => vec![1.0],
        Deterministic::ConstantTrend => vec![1.0, t as f64],
    }
}

/// ADF regression with `lags` augmentation terms over observations
/// `start..n` of the differenced series (`start >= lags + 1`).
fn adf_regression(x: &[f64], lags: usize, start: usize, spec: Deterministic) -> Option<Ols> {
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // dx[t-1] = x[t] - x[t-1]
    let mut rows = Vec::with_capacity(x.len());
    let mut y = Vec::with_capacity(x.len());
    for t in start..x.len() {
        let mut row = deterministic_cols(spec, t);
        row.push(x[t - 1]);
        for j in 1..=lags {
            row.push(dx[t - 1 - j]);
        }
        rows.push(row);
        y.push(dx[t - 1]);
    }
    stats::ols(&rows, &y)
}

fn level_index(spec: Deterministic) -> usize {
    match spec {
        Deterministic::Constant => 1,
        Deterministic::ConstantTrend => 2,
    }
}

fn aic_lag(x: &[f64], max_lag: usize, spec: Deterministic) -> Result<usize> {
    let start = max_lag + 1;
    let mut best: Option<(usize, f64)> = None;
    for p in 0..=max_lag {
        let Some(fit) = adf_regression(x, p, start, spec) else {
            continue;
        };
        let k = fit.coef.len() as f64;
        let nobs = fit.nobs as f64;
        let aic = nobs * (fit.rss / nobs).ln() + 2.0 * k;
        if best.is_none_or(|(_, b)| aic < b) {
            best = Some((p, aic));
        }
    }
    best.map(|(p, _)| p).ok_or_else(|| {
        Error::Unsupported("ADF regression is singular for every lag order".into())
    })
}

fn check_adf_length(x: &[f64], max_lag: usize) -> Result<()> {
    if x.len() <= max_lag + 10 {
        return Err(Error::InsufficientData {
            what: "ADF test",
            needed: max_lag + 11,
            got: x.len(),
        });
    }
    Ok(())
}

/// AIC-minimizing augmentation order in `0..=max_lag` (constant-only
/// regression, common estimation sample, ties to fewer lags).
pub fn select_lags_aic(x: &[f64], max_lag: usize) -> Result<usize> {
    check_adf_length(x, max_lag)?;
    if max_lag == 0 {
        return Ok(0);
    }
    aic_lag(x, max_lag, Deterministic::Constant)
}

/// ADF t-ratio on the lagged level with the augmentation order chosen by AIC.
pub fn adf_test(x: &[f64], max_lag: usize, spec: Deterministic) -> Result<UnitRootResult> {
    check_adf_length(x, max_lag)?;
    let lags = if max_lag == 0 { 0 } else { aic_lag(x, max_lag, spec)? };
    let fit = adf_regression(x, lags, lags + 1, spec)
        .ok_or_else(|| Error::Unsupported("ADF regression is singular".into()))?;
    let idx = level_index(spec);
    let statistic = fit.coef[idx] / fit.se[idx];
    let critical = adf_critical_5pct(spec, fit.nobs);
    Ok(UnitRootResult {
        test_kind: UnitRootTest::Adf,
        statistic,
        lags_or_bandwidth: lags,
        deterministic_spec: spec,
        nobs: fit.nobs,
        critical_value_5pct: critical,
        reject_5pct: statistic < critical,
        critical_value_source: ADF_CV_SOURCE.to_string(),
    })
}

/// Phillips-Perron test with constant-only deterministic terms.
pub fn pp_test(x: &[f64], variant: UnitRootTest) -> Result<UnitRootResult> {
    pp_test_with(x, variant, Deterministic::Constant)
}

pub fn pp_test_with(x: &[f64], variant: UnitRootTest, spec: Deterministic) -> Result<UnitRootResult> {
    if variant == UnitRootTest::Adf {
        return Err(Error::InvalidParameter {
            name: "variant",
            reason: "PP test variant must be Z_t or Z_rho".into(),
        });
    }
    if x.len() < 50 {
        return Err(Error::InsufficientData {
            what: "Phillips-Perron test",
            needed: 50,
            got: x.len(),
        });
    }
    let rows: Vec<Vec<f64>> = (1..x.len())
        .map(|t| {
            let mut row = deterministic_cols(spec, t);
            row.push(x[t - 1]);
            row
        })
        .collect();
    let fit = stats::ols(&rows, &x[1..])
        .ok_or_else(|| Error::Unsupported("PP regression is singular".into()))?;
    let idx = level_index(spec);
    let t_obs = fit.nobs as f64;
    let rho = fit.coef[idx];
    let se = fit.se[idx];
    let u = &fit.residuals;
    let s2 = fit.rss / (t_obs - fit.coef.len() as f64);
    let bandwidth = pp_bandwidth(x.len());
    let gamma = |j: usize| u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / t_obs;
    let gamma0 = gamma(0);
    let lambda2 = gamma0
        + 2.0
            * (1..=bandwidth)
                .map(|j| (1.0 - j as f64 / (bandwidth + 1) as f64) * gamma(j))
                .sum::<f64>();
    let (statistic, critical, source) = match variant {
        UnitRootTest::PpZrho => {
            let z = t_obs * (rho - 1.0)
                - 0.5 * (t_obs * t_obs * se * se / s2) * (lambda2 - gamma0);
            (z, zrho_critical_5pct(spec, fit.nobs), ZRHO_CV_SOURCE)
        }
        _ => {
            let t_rho = (rho - 1.0) / se;
            let z = (gamma0 / lambda2).sqrt() * t_rho
                - 0.5 * (lambda2 - gamma0) / lambda2.sqrt() * (t_obs * se / s2.sqrt());
            (z, adf_critical_5pct(spec, fit.nobs), ADF_CV_SOURCE)
        }
    };
    Ok(UnitRootResult {
        test_kind: variant,
        statistic,
        lags_or_bandwidth: bandwidth,
        deterministic_spec: spec,
        nobs: fit.nobs,
        critical_value_5pct: critical,
        reject_5pct: statistic < critical,
        critical_value_source: source.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{map_reps, rate, stream, Execution};
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, idx: u64, n: usize) -> Vec<f64> {
        let mut rng = stream(seed, idx);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(phi: f64, e: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(e.len());
        let mut prev = 0.0;
        for v in e {
            prev = phi * prev + v;
            out.push(prev);
        }
        out
    }

    #[test]
    fn max_lag_zero_forces_zero() {
        let x = ar1(1.0, &noise(1, 0, 200));
        assert_eq!(select_lags_aic(&x, 0).unwrap(), 0);
    }

    #[test]
    fn too_short_is_an_error() {
        let x = vec![1.0; 15];
        assert!(matches!(adf_test(&x, 5, Deterministic::Constant), Err(Error::InsufficientData { .. })));
        assert!(pp_test(&x, UnitRootTest::PpZt).is_err());
        assert!(pp_test(&noise(1, 0, 100), UnitRootTest::Adf).is_err());
    }

    #[test]
    fn defaults_follow_formulas() {
        assert_eq!(default_max_lag(100), 12);
        assert_eq!(default_max_lag(776), 20);
        assert_eq!(pp_bandwidth(100), 4);
        assert_eq!(pp_bandwidth(2348), 8);
    }

    #[test]
    fn critical_values_are_sane() {
        assert!((adf_critical_5pct(Deterministic::Constant, 100_000) + 2.8616).abs() < 1e-3);
        assert!((zrho_critical_5pct(Deterministic::Constant, 100) + 13.7).abs() < 1e-12);
        assert!((zrho_critical_5pct(Deterministic::Constant, 10) + 12.5).abs() < 1e-12);
        let mid = zrho_critical_5pct(Deterministic::Constant, 1000);
        assert!(mid < -14.0 && mid > -14.1);
    }

    #[test]
    fn white_noise_selects_zero_lags_modally() {
        let picks = map_reps(40, Execution::default(), |i| {
            select_lags_aic(&noise(3, i as u64, 500), 8).unwrap()
        });
        let zeros = picks.iter().filter(|&&p| p == 0).count();
        let mut counts = [0usize; 9];
        for p in &picks {
            counts[*p] += 1;
        }
        assert_eq!(counts.iter().max().copied(), Some(zeros));
    }

    #[test]
    fn ar2_differences_select_lags() {
        let picks = map_reps(40, Execution::default(), |i| {
            let e = noise(4, i as u64, 800);
            let mut dx = vec![0.0; e.len()];
            for t in 2..e.len() {
                dx[t] = 0.5 * dx[t - 1] - 0.3 * dx[t - 2] + e[t];
            }
            let x: Vec<f64> = dx
                .iter()
                .scan(0.0, |s, v| {
                    *s += v;
                    Some(*s)
                })
                .collect();
            select_lags_aic(&x, 8).unwrap()
        });
        let positive = picks.iter().filter(|&&p| p >= 1).count();
        assert!(positive > picks.len() / 2);
    }

    #[test]
    fn adf_is_affine_invariant() {
        let x = ar1(0.98, &noise(8, 0, 600));
        let y: Vec<f64> = x.iter().map(|v| 3.5 * v - 12.0).collect();
        let a = adf_test(&x, 6, Deterministic::Constant).unwrap();
        let b = adf_test(&y, 6, Deterministic::Constant).unwrap();
        assert_eq!(a.lags_or_bandwidth, b.lags_or_bandwidth);
        assert!((a.statistic - b.statistic).abs() < 1e-8);
        let a = adf_test(&x, 6, Deterministic::ConstantTrend).unwrap();
        let b = adf_test(&y, 6, Deterministic::ConstantTrend).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-8);
    }

    #[test]
    fn reject_flag_matches_critical_value() {
        for i in 0..10 {
            let x = ar1(0.97, &noise(9, i, 300));
            for r in [
                adf_test(&x, 4, Deterministic::Constant).unwrap(),
                pp_test(&x, UnitRootTest::PpZt).unwrap(),
                pp_test(&x, UnitRootTest::PpZrho).unwrap(),
            ] {
                assert_eq!(r.reject_5pct, r.statistic < r.critical_value_5pct);
            }
        }
    }

    #[test]
    fn zrho_on_white_noise_is_order_minus_n() {
        let x = noise(10, 0, 2348);
        let r = pp_test(&x, UnitRootTest::PpZrho).unwrap();
        assert!(r.reject_5pct);
        assert!(r.statistic < -1800.0 && r.statistic > -2900.0, "{}", r.statistic);
    }

    #[test]
    fn pp_random_walk_rarely_rejects() {
        for variant in [UnitRootTest::PpZt, UnitRootTest::PpZrho] {
            let keep = rate(500, Execution::default(), |i| {
                let x = ar1(1.0, &noise(11, i as u64, 500));
                !pp_test(&x, variant).unwrap().reject_5pct
            });
            assert!(keep >= 0.91, "{variant:?} non-rejection {keep}");
        }
    }

    #[test]
    fn zt_tracks_adf_on_ar1() {
        let x = ar1(0.99, &noise(12, 0, 5000));
        let adf = adf_test(&x, 0, Deterministic::Constant).unwrap();
        let zt = pp_test(&x, UnitRootTest::PpZt).unwrap();
        assert!((adf.statistic - zt.statistic).abs() < 0.3, "{} {}", adf.statistic, zt.statistic);
    }
}
