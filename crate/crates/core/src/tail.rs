//! Hill tail-index estimation with adaptive threshold choice, and the
//! z-type tests built on it.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::ReturnSeries;

/// Which tail of the return distribution is being described.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
    Both,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::Lower, Side::Upper, Side::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
            Side::Both => "both",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" | "-" => Ok(Side::Lower),
            "upper" | "+" => Ok(Side::Upper),
            "both" | "*" => Ok(Side::Both),
            other => Err(invalid("side", format!("unknown tail side `{other}`"))),
        }
    }
}

/// Positive tail magnitudes in non-increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSample {
    pub side: Side,
    values: Vec<f64>,
    pub n_source: usize,
}

impl TailSample {
    /// Extracts magnitudes from raw returns without size checks: upper keeps
    /// positive values, lower negates negative values, both takes absolute
    /// values. Zeros are dropped.
    pub fn from_returns(returns: &[f64], side: Side) -> Self {
        let mut values: Vec<f64> = returns
            .iter()
            .filter_map(|&r| {
                let v = match side {
                    Side::Upper => r,
                    Side::Lower => -r,
                    Side::Both => r.abs(),
                };
                (v > 0.0).then_some(v)
            })
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Self {
            side,
            values,
            n_source: returns.len(),
        }
    }

    /// Sample from already-positive magnitudes (any order).
    pub fn from_magnitudes(side: Side, magnitudes: Vec<f64>, n_source: usize) -> Result<Self> {
        if magnitudes.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("magnitudes", "tail magnitudes must be positive and finite"));
        }
        let mut values = magnitudes;
        values.sort_by(|a, b| b.total_cmp(a));
        let n_source = n_source.max(values.len());
        Ok(Self {
            side,
            values,
            n_source,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const MIN_SERIES_LEN: usize = 50;
const MIN_TAIL_LEN: usize = 10;

/// Tail magnitudes of a return series; needs at least 50 returns and at
/// least 10 non-zero magnitudes on the requested side.
pub fn tail_sample(r: &ReturnSeries, side: Side) -> Result<TailSample> {
    if r.len() < MIN_SERIES_LEN {
        return Err(Error::InsufficientData {
            what: "tail sample",
            needed: MIN_SERIES_LEN,
            got: r.len(),
        });
    }
    let t = TailSample::from_returns(r.values(), side);
    if t.len() < MIN_TAIL_LEN {
        return Err(Error::InsufficientData {
            what: "tail magnitudes",
            needed: MIN_TAIL_LEN,
            got: t.len(),
        });
    }
    Ok(t)
}

/// A fitted tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub side: Side,
    /// Number of upper order statistics used.
    pub m: usize,
    /// The order statistic `r_(n-m)` the excesses are measured from (percent).
    pub threshold_value: f64,
    /// Mean log-excess, the inverse tail index.
    pub gamma: f64,
    /// Tail index, `1 / gamma`.
    pub alpha: f64,
    /// `alpha / sqrt(m)`.
    pub se_alpha: f64,
    /// Number of returns the tail was drawn from.
    pub n: usize,
}

impl TailEstimate {
    /// Rebuilds an estimate from a reported tail index and standard error;
    /// `m` is recovered as `round((alpha/se)^2)`.
    pub fn from_alpha_se(side: Side, alpha: f64, se: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && se > 0.0) {
            return Err(invalid("alpha/se", "tail index and standard error must be positive"));
        }
        let m = ((alpha / se).powi(2).round() as usize).max(1);
        Ok(Self {
            side,
            m,
            threshold_value: f64::NAN,
            gamma: 1.0 / alpha,
            alpha,
            se_alpha: alpha / (m as f64).sqrt(),
            n,
        })
    }

    /// Empirical exceedance probability of the threshold, `m / n`.
    pub fn tail_fraction(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

/// Hill estimate from the top `m` order statistics of `t`.
pub fn hill_gamma(t: &TailSample, m: usize) -> Result<TailEstimate> {
    let v = t.values();
    if m < 1 || m >= v.len() {
        return Err(invalid(
            "m",
            format!("threshold count {m} outside 1..{} for a tail of {}", v.len(), v.len()),
        ));
    }
    let threshold = v[m];
    let log_threshold = threshold.ln();
    let gamma = v[..m].iter().map(|x| x.ln() - log_threshold).sum::<f64>() / m as f64;
    if !(gamma > 0.0) {
        return Err(Error::DegenerateTail {
            side: t.side.to_string(),
            m,
        });
    }
    let alpha = 1.0 / gamma;
    Ok(TailEstimate {
        side: t.side,
        m,
        threshold_value: threshold,
        gamma,
        alpha,
        se_alpha: alpha / (m as f64).sqrt(),
        n: t.n_source,
    })
}

pub const PRELIM_EXPONENT_LOW: f64 = 0.6;
pub const PRELIM_EXPONENT_HIGH: f64 = 0.9;

/// Intermediate quantities of the adaptive threshold rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSelection {
    /// Tail sample size the rule was applied to.
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub lambda: Option<f64>,
    pub m_star: usize,
    pub fallback_used: bool,
}

fn floor_pow(n: usize, e: f64) -> usize {
    ((n as f64).powf(e) + 1e-9).floor() as usize
}

/// Preliminary truncations are rounded to the nearest count: n = 776 gives
/// (54, 399) where flooring would give 398.
fn round_pow(n: usize, e: f64) -> usize {
    (n as f64).powf(e).round() as usize
}

/// Mean-square-error driven threshold: preliminary tail indices at
/// `round(n^0.6)` and `round(n^0.9)` calibrate
/// `lambda = |a1 / (sqrt 2 (n/m2) (a1 - a2))|^(2/3)`, then `m* = round(lambda n^(2/3))`
/// clamped to `[2, n/2]`. Falls back to `floor(n^(2/3))` when the
/// preliminary estimates coincide or `lambda` is not finite.
pub fn select_threshold(t: &TailSample) -> Result<ThresholdSelection> {
    let n = t.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InsufficientData {
            what: "threshold selection",
            needed: MIN_SERIES_LEN,
            got: n,
        });
    }
    let m1 = round_pow(n, PRELIM_EXPONENT_LOW);
    let m2 = round_pow(n, PRELIM_EXPONENT_HIGH);
    let gamma1 = hill_gamma(t, m1).ok().map(|e| e.gamma);
    let gamma2 = hill_gamma(t, m2).ok().map(|e| e.gamma);
    Ok(threshold_from_preliminary(n, m1, m2, gamma1, gamma2))
}

pub(crate) fn threshold_from_preliminary(
    n: usize,
    m1: usize,
    m2: usize,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
) -> ThresholdSelection {
    let upper = (n / 2).max(2);
    let n_two_thirds = (n as f64).powf(2.0 / 3.0);
    let lambda = match (gamma1, gamma2) {
        (Some(g1), Some(g2)) if g1 != g2 && g1 > 0.0 && g2 > 0.0 => {
            // The calibration is stated in tail indices, alpha = 1/gamma.
            let (a1, a2) = (1.0 / g1, 1.0 / g2);
            let ratio = a1 / (std::f64::consts::SQRT_2 * (n as f64 / m2 as f64) * (a1 - a2));
            let l = ratio.abs().powf(2.0 / 3.0);
            (l.is_finite() && l > 0.0).then_some(l)
        }
        _ => None,
    };
    let (m_star, fallback_used) = match lambda {
        Some(l) => ((l * n_two_thirds).round().clamp(2.0, upper as f64) as usize, false),
        None => ((floor_pow(n, 2.0 / 3.0)).clamp(2, upper), true),
    };
    ThresholdSelection {
        n,
        m1,
        m2,
        gamma1,
        gamma2,
        lambda,
        m_star,
        fallback_used,
    }
}

/// Hill estimate at the adaptively chosen threshold, with the selection trace.
pub fn estimate_tail_traced(r: &ReturnSeries, side: Side) -> Result<(TailEstimate, ThresholdSelection)> {
    let sample = tail_sample(r, side)?;
    let selection = select_threshold(&sample)?;
    let estimate = hill_gamma(&sample, selection.m_star)?;
    Ok((estimate, selection))
}

pub fn estimate_tail(r: &ReturnSeries, side: Side) -> Result<TailEstimate> {
    estimate_tail_traced(r, side).map(|(e, _)| e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailTestKind {
    /// Upper versus lower tail of one series.
    TailSymmetry,
    /// Same tail across periods or series.
    CrossPeriod,
    /// H0: alpha >= k (moment of order k finite); rejects for large negative z.
    MomentK,
    /// H0: alpha <= 2 (stable Paretian); rejects for large positive z.
    StableFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTestResult {
    pub kind: TailTestKind,
    pub statistic: f64,
    pub critical_value: f64,
    pub reject: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

pub const STABILITY_CRITICAL: f64 = 1.96;
pub const ONE_SIDED_CRITICAL: f64 = 1.645;

/// Signed stability statistic `(alpha_a - alpha_b) / sqrt(alpha_a^2/m_a + alpha_b^2/m_b)`,
/// two-sided at 5%.
pub fn tail_stability(a: &TailEstimate, b: &TailEstimate) -> TailTestResult {
    let denom = (a.alpha * a.alpha / a.m as f64 + b.alpha * b.alpha / b.m as f64).sqrt();
    let statistic = (a.alpha - b.alpha) / denom;
    TailTestResult {
        kind: if a.side != b.side {
            TailTestKind::TailSymmetry
        } else {
            TailTestKind::CrossPeriod
        },
        statistic,
        critical_value: STABILITY_CRITICAL,
        reject: statistic.abs() > STABILITY_CRITICAL,
        k: None,
    }
}

fn moment_z(t: &TailEstimate, k: f64) -> f64 {
    (t.alpha - k) * (t.m as f64).sqrt() / t.alpha
}

/// Existence of the moment of order `k`: H0 `alpha >= k`, rejected when
/// `z < -1.645`.
pub fn moment_test(t: &TailEstimate, k: f64) -> Result<TailTestResult> {
    if !(k > 0.0) {
        return Err(invalid("k", "moment order must be positive"));
    }
    let statistic = moment_z(t, k);
    Ok(TailTestResult {
        kind: TailTestKind::MomentK,
        statistic,
        critical_value: -ONE_SIDED_CRITICAL,
        reject: statistic < -ONE_SIDED_CRITICAL,
        k: Some(k),
    })
}

/// Stable-Paretian membership: H0 `alpha <= 2`, rejected when `z > 1.645`.
pub fn stable_family_test(t: &TailEstimate) -> TailTestResult {
    let statistic = moment_z(t, 2.0);
    TailTestResult {
        kind: TailTestKind::StableFamily,
        statistic,
        critical_value: ONE_SIDED_CRITICAL,
        reject: statistic > ONE_SIDED_CRITICAL,
        k: Some(2.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatedReturn {
    pub date: NaiveDate,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    /// Largest returns, largest first.
    pub highest: Vec<DatedReturn>,
    /// Smallest returns, smallest first.
    pub lowest: Vec<DatedReturn>,
}

/// The `k` highest and `k` lowest returns with their dates. Ties keep date order.
pub fn top_extremes(r: &ReturnSeries, k: usize) -> Result<Extremes> {
    if 2 * k > r.len() {
        return Err(invalid("k", format!("k = {k} exceeds half the series length {}", r.len())));
    }
    let mut idx: Vec<usize> = (0..r.len()).collect();
    let v = r.values();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    let dated = |i: &usize| DatedReturn {
        date: r.dates()[*i],
        value: v[*i],
    };
    let highest = idx[..k].iter().map(dated).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let lowest = idx[..k].iter().map(dated).collect();
    Ok(Extremes { highest, lowest })
}
