//! Extreme-value limit laws and the synthetic distributions used as oracles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::montecarlo::{self, Execution, SimRng};
use crate::stats;

/// The three extreme-value limit families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvdFamily {
    Gumbel,
    Frechet,
    Weibull,
}

/// Shape of the generalized extreme value law, `H_gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub gamma_shape: f64,
}

impl GevParams {
    pub fn family(&self) -> EvdFamily {
        classify_domain(self.gamma_shape)
    }
}

/// `exp(-(1 + gamma r)^(-1/gamma))`, with the Gumbel limit at `gamma = 0` and
/// the 0/1 plateaus outside the support.
pub fn gev_cdf(p: GevParams, r: f64) -> f64 {
    let g = p.gamma_shape;
    if g == 0.0 {
        return (-(-r).exp()).exp();
    }
    let z = 1.0 + g * r;
    if z <= 0.0 {
        return if g > 0.0 { 0.0 } else { 1.0 };
    }
    // (1 + g r)^(-1/g) via log1p keeps the small-gamma limit accurate
    (-(-(g * r).ln_1p() / g).exp()).exp()
}

/// The standard Gumbel, Frechet and Weibull distribution functions.
pub fn evd_cdf(family: EvdFamily, alpha: f64, r: f64) -> f64 {
    match family {
        EvdFamily::Gumbel => (-(-r).exp()).exp(),
        EvdFamily::Frechet => {
            if r <= 0.0 {
                0.0
            } else {
                (-r.powf(-alpha)).exp()
            }
        }
        EvdFamily::Weibull => {
            if r > 0.0 {
                1.0
            } else {
                (-(-r).powf(alpha)).exp()
            }
        }
    }
}

/// Sign rule: positive shape is Frechet, zero Gumbel, negative Weibull.
pub fn classify_domain(gamma_shape: f64) -> EvdFamily {
    if gamma_shape > 0.0 {
        EvdFamily::Frechet
    } else if gamma_shape < 0.0 {
        EvdFamily::Weibull
    } else {
        EvdFamily::Gumbel
    }
}

/// A parametric distribution for synthetic data. All families are centred at
/// zero (or start at zero) and stretched by `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistSpec {
    Normal { scale: f64 },
    Lognormal { scale: f64 },
    Exponential { scale: f64 },
    Uniform { scale: f64 },
    Cauchy { scale: f64 },
    StudentT { dof: f64, scale: f64 },
    /// Support `[scale, inf)`, survivor `(x/scale)^-alpha`.
    Pareto { alpha: f64, scale: f64 },
    Frechet { alpha: f64, scale: f64 },
}

impl DistSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DistSpec::Normal { .. } => "normal",
            DistSpec::Lognormal { .. } => "lognormal",
            DistSpec::Exponential { .. } => "exponential",
            DistSpec::Uniform { .. } => "uniform",
            DistSpec::Cauchy { .. } => "cauchy",
            DistSpec::StudentT { .. } => "student_t",
            DistSpec::Pareto { .. } => "pareto",
            DistSpec::Frechet { .. } => "frechet",
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            DistSpec::Normal { scale }
            | DistSpec::Lognormal { scale }
            | DistSpec::Exponential { scale }
            | DistSpec::Uniform { scale }
            | DistSpec::Cauchy { scale }
            | DistSpec::StudentT { scale, .. }
            | DistSpec::Pareto { scale, .. }
            | DistSpec::Frechet { scale, .. } => scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("scale", self.scale())?;
        match *self {
            DistSpec::StudentT { dof, .. } => positive("dof", dof),
            DistSpec::Pareto { alpha, .. } | DistSpec::Frechet { alpha, .. } => positive("alpha", alpha),
            _ => Ok(()),
        }
    }

    /// Maximum domain of attraction of the family.
    pub fn domain(&self) -> EvdFamily {
        match self {
            DistSpec::Normal { .. } | DistSpec::Lognormal { .. } | DistSpec::Exponential { .. } => {
                EvdFamily::Gumbel
            }
            DistSpec::Uniform { .. } => EvdFamily::Weibull,
            _ => EvdFamily::Frechet,
        }
    }

    /// Tail index for Frechet-domain families.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            DistSpec::Cauchy { .. } => Some(1.0),
            DistSpec::StudentT { dof, .. } => Some(dof),
            DistSpec::Pareto { alpha, .. } | DistSpec::Frechet { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Constant `C` with `1 - F(x) ~ C x^-alpha` as `x -> inf`.
    pub fn tail_constant(&self) -> Option<f64> {
        match *self {
            DistSpec::Pareto { alpha, scale } | DistSpec::Frechet { alpha, scale } => {
                Some(scale.powf(alpha))
            }
            DistSpec::Cauchy { scale } => Some(scale / PI),
            DistSpec::StudentT { dof, scale } => {
                let log_c = ln_gamma((dof + 1.0) / 2.0) - ln_gamma(dof / 2.0) - 0.5 * PI.ln()
                    + (dof / 2.0 - 1.0) * dof.ln();
                Some(log_c.exp() * scale.powf(dof))
            }
            _ => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistSpec::Normal { scale } => stats::std_normal_cdf(x / scale),
            DistSpec::Lognormal { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    stats::std_normal_cdf(x.ln() / scale)
                }
            }
            DistSpec::Exponential { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / scale).exp_m1()
                }
            }
            DistSpec::Uniform { scale } => (x / scale).clamp(0.0, 1.0),
            DistSpec::Cauchy { scale } => 0.5 + (x / scale).atan() / PI,
            DistSpec::StudentT { dof, scale } => students_t(dof).cdf(x / scale),
            DistSpec::Pareto { alpha, scale } => {
                if x <= scale {
                    0.0
                } else {
                    1.0 - (x / scale).powf(-alpha)
                }
            }
            DistSpec::Frechet { alpha, scale } => evd_cdf(EvdFamily::Frechet, alpha, x / scale),
        }
    }

    /// `1 - F(x)`, evaluated without cancellation in the upper tail. The
    /// Student-t survivor is integrated numerically from the density.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            DistSpec::Normal { scale } => 0.5 * erfc(x / (scale * std::f64::consts::SQRT_2)),
            DistSpec::Lognormal { scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.5 * erfc(x.ln() / (scale * std::f64::consts::SQRT_2))
                }
            }
            DistSpec::Exponential { scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x / scale).exp()
                }
            }
            DistSpec::Uniform { scale } => 1.0 - (x / scale).clamp(0.0, 1.0),
            DistSpec::Cauchy { scale } => {
                let z = x / scale;
                if z > 0.0 {
                    (1.0 / z).atan() / PI
                } else {
                    0.5 - z.atan() / PI
                }
            }
            DistSpec::StudentT { dof, scale } => student_t_survival(dof, x / scale),
            DistSpec::Pareto { alpha, scale } => {
                if x <= scale {
                    1.0
                } else {
                    (x / scale).powf(-alpha)
                }
            }
            DistSpec::Frechet { alpha, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    -(-(x / scale).powf(-alpha)).exp_m1()
                }
            }
        }
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistSpec::Normal { scale } => scale * rng.sample::<f64, _>(StandardNormal),
            DistSpec::Lognormal { scale } => (scale * rng.sample::<f64, _>(StandardNormal)).exp(),
            DistSpec::Exponential { scale } => -scale * rng.sample::<f64, _>(Open01).ln(),
            DistSpec::Uniform { scale } => scale * rng.sample::<f64, _>(Open01),
            DistSpec::Cauchy { scale } => scale * (PI * (rng.sample::<f64, _>(Open01) - 0.5)).tan(),
            DistSpec::StudentT { dof, scale } => {
                let z: f64 = rng.sample(StandardNormal);
                let chi = ChiSquared::new(dof).expect("validated dof").sample(rng);
                scale * z / (chi / dof).sqrt()
            }
            DistSpec::Pareto { alpha, scale } => scale * rng.sample::<f64, _>(Open01).powf(-1.0 / alpha),
            DistSpec::Frechet { alpha, scale } => {
                scale * (-rng.sample::<f64, _>(Open01).ln()).powf(-1.0 / alpha)
            }
        }
    }
}

fn students_t(dof: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, dof).expect("validated dof")
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistSpec::StudentT { dof, scale } => write!(f, "student_t dof={dof} scale={scale}"),
            DistSpec::Pareto { alpha, scale } | DistSpec::Frechet { alpha, scale } => {
                write!(f, "{} alpha={alpha} scale={scale}", self.name())
            }
            _ => write!(f, "{} scale={}", self.name(), self.scale()),
        }
    }
}

impl FromStr for DistSpec {
    type Err = Error;

    /// Parses `family key=value ...`, e.g. `pareto alpha=3` or `student_t dof=4 scale=0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let family = parts
            .next()
            .ok_or_else(|| invalid("family", "empty distribution spec"))?;
        let mut alpha = None;
        let mut dof = None;
        let mut scale = 1.0;
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| invalid("parameter", format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| invalid("parameter", format!("`{v}` is not a number")))?;
            match k {
                "alpha" | "tail_index" => alpha = Some(v),
                "dof" | "df" | "nu" => dof = Some(v),
                "scale" => scale = v,
                other => return Err(invalid("parameter", format!("unknown parameter `{other}`"))),
            }
        }
        let need = |name: &'static str, v: Option<f64>| {
            v.ok_or_else(|| invalid(name, format!("`{family}` requires {name}=<value>")))
        };
        let spec = match family.to_ascii_lowercase().replace('-', "_").as_str() {
            "normal" | "gaussian" => DistSpec::Normal { scale },
            "lognormal" => DistSpec::Lognormal { scale },
            "exponential" => DistSpec::Exponential { scale },
            "uniform" => DistSpec::Uniform { scale },
            "cauchy" => DistSpec::Cauchy { scale },
            "student_t" | "t" | "studentt" => DistSpec::StudentT {
                dof: need("dof", dof)?,
                scale,
            },
            "pareto" => DistSpec::Pareto {
                alpha: need("alpha", alpha)?,
                scale,
            },
            "frechet" => DistSpec::Frechet {
                alpha: need("alpha", alpha)?,
                scale,
            },
            other => return Err(invalid("family", format!("unknown family `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `n` seeded draws from `spec`.
pub fn sample(spec: &DistSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    let mut rng = montecarlo::rng(seed);
    Ok(sample_with(spec, n, &mut rng))
}

/// `n` draws from an explicit generator.
pub fn sample_with(spec: &DistSpec, n: usize, rng: &mut SimRng) -> Vec<f64> {
    (0..n).map(|_| spec.draw(rng)).collect()
}

/// `(1 - F(t r)) / (1 - F(t))`; tends to `r^-alpha` for Frechet-domain laws.
pub fn gnedenko_ratio(spec: &DistSpec, t: f64, r: f64) -> Result<f64> {
    spec.validate()?;
    if !(t > 0.0 && r > 0.0) {
        return Err(invalid("t/r", "t and r must be positive"));
    }
    let denom = spec.survival(t);
    if denom <= 0.0 {
        return Err(Error::Unsupported(format!(
            "{} survivor vanishes at t = {t}",
            spec.name()
        )));
    }
    Ok(spec.survival(t * r) / denom)
}

const SURVIVAL_ABS_TOL: f64 = 1e-12;

/// Student-t survivor by adaptive Simpson integration of the density over
/// `[x, inf)`, mapped to `(0, 1]` with `y = x / u`.
pub fn student_t_survival(dof: f64, x: f64) -> f64 {
    if x <= 0.0 {
        // symmetry: P(T > x) = 1 - P(T > -x)
        return if x == 0.0 { 0.5 } else { 1.0 - student_t_survival(dof, -x) };
    }
    let t = students_t(dof);
    let f = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            let y = x / u;
            t.pdf(y) * x / (u * u)
        }
    };
    adaptive_simpson(&f, 0.0, 1.0, SURVIVAL_ABS_TOL, 60)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Outcome of a block-maxima max-stability comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxStabilityReport {
    pub block: usize,
    pub reps: usize,
    /// Factor `(C block)^(1/alpha)` applied to the standard Frechet reference.
    pub norming: f64,
    pub ks_statistic: f64,
    pub critical_value_5pct: f64,
    pub pass: bool,
}

/// Compares `reps` block maxima of size `block` with `reps` draws of
/// `(C block)^(1/alpha) R`, `R` standard Frechet(alpha), by a two-sample KS
/// test at 5%. For the ordinary Frechet `C = 1` and the identity is exact.
pub fn max_stability_check(
    spec: &DistSpec,
    block: usize,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<MaxStabilityReport> {
    spec.validate()?;
    let (Some(alpha), Some(c)) = (spec.tail_index(), spec.tail_constant()) else {
        return Err(Error::Unsupported(format!(
            "max-stability check needs a Frechet-domain family, got {}",
            spec.name()
        )));
    };
    if block == 0 || reps < 2 {
        return Err(invalid("block/reps", "need block >= 1 and reps >= 2"));
    }
    let norming = (c * block as f64).powf(1.0 / alpha);
    let reference_spec = DistSpec::Frechet { alpha, scale: 1.0 };
    let maxima = montecarlo::map_reps(reps, exec, |i| {
        let mut rng = montecarlo::stream(seed, i as u64);
        (0..block).map(|_| spec.draw(&mut rng)).fold(f64::NEG_INFINITY, f64::max)
    });
    let reference = montecarlo::map_reps(reps, exec, |i| {
        let mut rng = montecarlo::stream(seed, (1u64 << 40) + i as u64);
        norming * reference_spec.draw(&mut rng)
    });
    let ks = stats::ks_two_sample(&maxima, &reference);
    let critical = stats::ks_two_sample_critical_5pct(reps, reps);
    Ok(MaxStabilityReport {
        block,
        reps,
        norming,
        ks_statistic: ks,
        critical_value_5pct: critical,
        pass: ks <= critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gev_examples() {
        let e = (-1.0f64).exp();
        assert!((gev_cdf(GevParams { gamma_shape: 0.0 }, 0.0) - e).abs() < 1e-15);
        assert!((gev_cdf(GevParams { gamma_shape: 1.0 }, 0.0) - e).abs() < 1e-15);
        let near = gev_cdf(GevParams { gamma_shape: 1e-8 }, 2.0);
        let limit = gev_cdf(GevParams { gamma_shape: 0.0 }, 2.0);
        assert!((near - limit).abs() < 1e-7);
        // outside the support
        assert_eq!(gev_cdf(GevParams { gamma_shape: 0.5 }, -3.0), 0.0);
        assert_eq!(gev_cdf(GevParams { gamma_shape: -0.5 }, 3.0), 1.0);
    }

    #[test]
    fn evd_examples() {
        for a in [0.5, 1.0, 3.0] {
            assert!((evd_cdf(EvdFamily::Frechet, a, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
            assert_eq!(evd_cdf(EvdFamily::Frechet, a, 0.0), 0.0);
            assert_eq!(evd_cdf(EvdFamily::Frechet, a, -2.0), 0.0);
            assert_eq!(evd_cdf(EvdFamily::Weibull, a, 0.1), 1.0);
            assert_eq!(evd_cdf(EvdFamily::Weibull, a, 0.0), 1.0);
        }
    }

    #[test]
    fn domain_classification() {
        assert_eq!(classify_domain(0.33), EvdFamily::Frechet);
        assert_eq!(classify_domain(0.0), EvdFamily::Gumbel);
        assert_eq!(classify_domain(-0.5), EvdFamily::Weibull);
        assert_eq!(GevParams { gamma_shape: 0.25 }.family(), EvdFamily::Frechet);
    }

    #[test]
    fn gev_matches_frechet_after_reparameterization() {
        for a0 in [0.5, 1.0, 2.5, 4.0] {
            let g = 1.0 / a0;
            for i in 0..200 {
                let r = -1.0 / g + 0.05 * (i as f64 + 1.0);
                let lhs = gev_cdf(GevParams { gamma_shape: g }, r);
                let rhs = evd_cdf(EvdFamily::Frechet, a0, 1.0 + g * r);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parses_specs() {
        let s: DistSpec = "pareto alpha=3".parse().unwrap();
        assert_eq!(s, DistSpec::Pareto { alpha: 3.0, scale: 1.0 });
        let s: DistSpec = "student_t dof=4 scale=0.5".parse().unwrap();
        assert_eq!(s, DistSpec::StudentT { dof: 4.0, scale: 0.5 });
        assert_eq!(s.to_string().parse::<DistSpec>().unwrap(), s);
        assert!("pareto".parse::<DistSpec>().is_err());
        assert!("pareto alpha=-1".parse::<DistSpec>().is_err());
        assert!("gamma shape=2".parse::<DistSpec>().is_err());
        assert!("normal scale=0".parse::<DistSpec>().is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = DistSpec::StudentT { dof: 3.0, scale: 1.0 };
        assert_eq!(sample(&spec, 100, 9).unwrap(), sample(&spec, 100, 9).unwrap());
        assert_ne!(sample(&spec, 100, 9).unwrap(), sample(&spec, 100, 10).unwrap());
        assert!(sample(&spec, 0, 9).is_err());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let x = sample(&DistSpec::Uniform { scale: 1.0 }, 10_000, 1).unwrap();
        assert!(x.iter().all(|v| *v >= 0.0 && *v <= 1.0));
    }

    #[test]
    fn pareto_tail_exceedance_on_grid() {
        // quantile function applied to a midpoint u-grid
        let n = 1_000_000;
        let alpha = 2.0;
        let exceed = (0..n)
            .map(|i| ((i as f64 + 0.5) / n as f64).powf(-1.0 / alpha))
            .filter(|x| *x > 10.0)
            .count() as f64
            / n as f64;
        assert!((exceed / 0.01 - 1.0).abs() < 0.005);
        let spec = DistSpec::Pareto { alpha, scale: 1.0 };
        assert!((spec.survival(10.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn gnedenko_pareto_is_exact() {
        let spec = DistSpec::Pareto { alpha: 3.0, scale: 1.0 };
        for t in [1.5, 10.0, 1e3] {
            assert_eq!(gnedenko_ratio(&spec, t, 2.0).unwrap(), 0.125);
        }
    }

    #[test]
    fn gnedenko_student_t_converges() {
        let spec = DistSpec::StudentT { dof: 3.0, scale: 1.0 };
        let ratios: Vec<f64> = [10.0, 50.0, 100.0]
            .iter()
            .map(|&t| gnedenko_ratio(&spec, t, 2.0).unwrap())
            .collect();
        let gaps: Vec<f64> = ratios.iter().map(|r| (r - 0.125).abs()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{ratios:?}");
        assert!(gaps[2] < 1e-3);
    }

    #[test]
    fn student_t_survival_matches_incomplete_beta() {
        for dof in [1.0, 3.0, 6.0] {
            let t = students_t(dof);
            for x in [0.5, 2.0, 10.0, 40.0] {
                let numeric = student_t_survival(dof, x);
                let closed = t.sf(x);
                assert!((numeric - closed).abs() < 1e-11, "dof {dof} x {x}: {numeric} vs {closed}");
            }
            assert!((student_t_survival(dof, -2.0) - t.sf(-2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn gnedenko_normal_decays_exponentially() {
        let spec = DistSpec::Normal { scale: 1.0 };
        assert!(gnedenko_ratio(&spec, 10.0, 2.0).unwrap() < 1e-10);
    }

    #[test]
    fn tail_constants() {
        let c = DistSpec::StudentT { dof: 1.0, scale: 1.0 }.tail_constant().unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-14);
        let spec = DistSpec::StudentT { dof: 3.0, scale: 1.0 };
        let c = spec.tail_constant().unwrap();
        let x: f64 = 1e4;
        assert!((spec.survival(x) * x.powi(3) / c - 1.0).abs() < 1e-3);
    }

    #[test]
    fn max_stability_unsupported_family() {
        let r = max_stability_check(&DistSpec::Normal { scale: 1.0 }, 10, 100, 1, Execution::Sequential);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn max_stability_block_one() {
        let spec = DistSpec::Frechet { alpha: 2.0, scale: 1.0 };
        let r = max_stability_check(&spec, 1, 2000, 3, Execution::default()).unwrap();
        assert_eq!(r.norming, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn max_stability_pareto() {
        let spec = DistSpec::Pareto { alpha: 2.0, scale: 1.0 };
        let passes = (0..5)
            .filter(|&s| max_stability_check(&spec, 1000, 2000, s, Execution::default()).unwrap().pass)
            .count();
        assert!(passes >= 3);
    }
}
