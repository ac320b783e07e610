//! Extreme quantiles and exceedance probabilities from a fitted tail.
//!
//! Both follow the power law implied by the Hill fit: for a tail probability
//! `p`, `r_p = r_(n-m) (m / (n p))^gamma`, and for a level `x` above the
//! threshold, `P(X > x) = (m/n) (x / r_(n-m))^(-alpha)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tail::TailEstimate;

fn check_estimate(t: &TailEstimate) -> Result<()> {
    if !(t.threshold_value > 0.0 && t.threshold_value.is_finite()) {
        return Err(invalid("estimate", "tail estimate carries no usable threshold value"));
    }
    if t.n == 0 || t.m == 0 {
        return Err(invalid("estimate", "tail estimate has empty counts"));
    }
    Ok(())
}

/// Return level exceeded with probability `p` (percent units of the input).
pub fn quantile(t: &TailEstimate, p: f64) -> Result<f64> {
    check_estimate(t)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("tail probability {p} outside (0, 1)")));
    }
    Ok(t.threshold_value * (t.m as f64 / (t.n as f64 * p)).powf(t.gamma))
}

/// Probability of exceeding `x`. Levels below the threshold are capped at
/// `m/n`; see [`exceedance`] for the flagged form.
pub fn excess_probability(t: &TailEstimate, x: f64) -> Result<f64> {
    exceedance(t, x).map(|e| e.probability)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub probability: f64,
    /// `x` lies below the fitted threshold; the probability is capped at `m/n`.
    pub out_of_region: bool,
}

pub fn exceedance(t: &TailEstimate, x: f64) -> Result<Exceedance> {
    check_estimate(t)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid("x", format!("level {x} must be positive")));
    }
    let frac = t.tail_fraction();
    if x < t.threshold_value {
        return Ok(Exceedance {
            probability: frac,
            out_of_region: true,
        });
    }
    Ok(Exceedance {
        probability: frac * (x / t.threshold_value).powf(-t.alpha),
        out_of_region: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEntry {
    pub tail_probability: f64,
    pub return_level: f64,
    /// `p >= 1/n`: the level lies inside the observed horizon.
    pub in_sample: bool,
    /// `p > m/n`: the power law is used below its fitted threshold.
    pub out_of_region: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileGrid {
    pub estimate: TailEstimate,
    pub entries: Vec<QuantileEntry>,
}

/// `{0.05, 0.01, 0.005, 1/n, 1/(2n), 1/(4n)}`.
pub fn default_probabilities(n: usize) -> Vec<f64> {
    let n = n as f64;
    vec![0.05, 0.01, 0.005, 1.0 / n, 1.0 / (2.0 * n), 1.0 / (4.0 * n)]
}

/// Quantiles at `probs`, ordered by decreasing probability.
pub fn quantile_grid(t: &TailEstimate, probs: &[f64]) -> Result<QuantileGrid> {
    if probs.is_empty() {
        return Err(invalid("probs", "probability grid is empty"));
    }
    let mut ps = probs.to_vec();
    ps.sort_by(|a, b| b.total_cmp(a));
    ps.dedup();
    let n = t.n as f64;
    let entries = ps
        .into_iter()
        .map(|p| {
            Ok(QuantileEntry {
                tail_probability: p,
                return_level: quantile(t, p)?,
                in_sample: p * n >= 1.0 - 1e-12,
                out_of_region: p > t.tail_fraction(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(entries.windows(2).all(|w| w[1].return_level > w[0].return_level));
    Ok(QuantileGrid {
        estimate: t.clone(),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEntry {
    pub level: f64,
    pub exceed_prob: f64,
    pub out_of_region: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityGrid {
    pub estimate: TailEstimate,
    pub entries: Vec<ProbabilityEntry>,
}

/// Levels `{5, 3, 2.5, 2, 1.5, 1}` percent.
pub fn default_levels() -> Vec<f64> {
    vec![5.0, 3.0, 2.5, 2.0, 1.5, 1.0]
}

/// Exceedance probabilities at `levels`, ordered by decreasing level.
pub fn probability_grid(t: &TailEstimate, levels: &[f64]) -> Result<ProbabilityGrid> {
    if levels.is_empty() {
        return Err(invalid("levels", "level grid is empty"));
    }
    let mut xs = levels.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    xs.dedup();
    let entries = xs
        .into_iter()
        .map(|x| {
            let e = exceedance(t, x)?;
            Ok(ProbabilityEntry {
                level: x,
                exceed_prob: e.probability,
                out_of_region: e.out_of_region,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityGrid {
        estimate: t.clone(),
        entries,
    })
}
