//! GARCH(1,1) with Student-t innovations, fitted by maximum likelihood.
//!
//! The mean equation is a constant. Pre-sample `eps_0^2` and `h_0` are both set
//! to the sample variance of the returns, so `h_1 = omega + (a + b) s^2`.
//! Estimation runs a Nelder-Mead search on an unconstrained reparameterization
//! and hands the incumbent to BHHH iterations driven by analytic scores.
//! Standard errors are the Bollerslev-Wooldridge sandwich.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared as ChiSquaredDist, ContinuousCDF};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::montecarlo;
use crate::stats;

pub const SIMPLEX_MAX_ITER: usize = 200;
pub const GRADIENT_MAX_ITER: usize = 500;
pub const MIN_OBSERVATIONS: usize = 300;
const N_PARAMS: usize = 5;

/// Model parameters: constant mean, variance recursion and t degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub mu: f64,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub dof: f64,
}

impl GarchParams {
    fn to_vec(self) -> [f64; N_PARAMS] {
        [self.mu, self.omega, self.a, self.b, self.dof]
    }

    fn from_slice(v: &[f64]) -> Self {
        Self {
            mu: v[0],
            omega: v[1],
            a: v[2],
            b: v[3],
            dof: v[4],
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.omega > 0.0
            && self.a >= 0.0
            && self.b >= 0.0
            && self.a + self.b < 1.0
            && self.dof > 2.0
            && self.mu.is_finite()
    }

    /// `omega / (1 - a - b)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.a - self.b)
    }
}

/// Per-parameter robust standard errors; `None` where the sandwich is not
/// available (e.g. an estimate sitting on the admissibility boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchStdErrors {
    pub mu: Option<f64>,
    pub omega: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub dof: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub statistic: f64,
    pub lags: usize,
    pub critical_value_5pct: f64,
    pub p_value: f64,
    pub reject_5pct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchDiagnostics {
    pub standardized_residuals: LjungBoxResult,
    pub squared_standardized_residuals: LjungBoxResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub mu: f64,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub dof: f64,
    pub log_likelihood: f64,
    pub robust_se: GarchStdErrors,
    /// Conditional standard deviations, percent, one per observation.
    pub sigma_path: Vec<f64>,
    pub converged: bool,
    /// `a + b` numerically at 1.
    pub non_stationary: bool,
    pub simplex_log_likelihood: f64,
    pub simplex_iterations: usize,
    pub gradient_iterations: usize,
    /// Sample variance used for the pre-sample `eps^2` and `h`.
    pub presample_variance: f64,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
    pub diagnostics: Option<GarchDiagnostics>,
}

impl GarchFit {
    pub fn params(&self) -> GarchParams {
        GarchParams {
            mu: self.mu,
            omega: self.omega,
            a: self.a,
            b: self.b,
            dof: self.dof,
        }
    }

    /// Recomputes the conditional sd path for `returns` from the stored parameters.
    pub fn recompute_sigma(&self, returns: &[f64]) -> Vec<f64> {
        conditional_sigma(&self.params(), returns, self.presample_variance)
    }

    /// `eps_t / sigma_t`.
    pub fn standardized_residuals(&self, returns: &[f64]) -> Vec<f64> {
        returns
            .iter()
            .zip(&self.sigma_path)
            .map(|(r, s)| (r - self.mu) / s)
            .collect()
    }
}

fn sample_variance(x: &[f64]) -> f64 {
    stats::central_moment(x, 2)
}

/// `sigma_t = sqrt(h_t)` with `h_t = omega + a eps_{t-1}^2 + b h_{t-1}` and
/// pre-sample `eps_0^2 = h_0 = presample_variance`.
pub fn conditional_sigma(p: &GarchParams, returns: &[f64], presample_variance: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(returns.len());
    let mut prev_e2 = presample_variance;
    let mut prev_h = presample_variance;
    for r in returns {
        let h = p.omega + p.a * prev_e2 + p.b * prev_h;
        out.push(h.sqrt());
        let e = r - p.mu;
        prev_e2 = e * e;
        prev_h = h;
    }
    out
}

/// Expected conditional variances `steps` ahead of a current `h`, which
/// approach `omega / (1 - a - b)` geometrically at rate `a + b`.
pub fn variance_forecast(p: &GarchParams, h_next: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps);
    let mut h = h_next;
    for _ in 0..steps {
        out.push(h);
        h = p.omega + (p.a + p.b) * h;
    }
    out
}

/// Simulates `n` returns (zero mean) with t innovations rescaled to unit variance.
pub fn garch_simulate(omega: f64, a: f64, b: f64, dof: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let p = GarchParams {
        mu: 0.0,
        omega,
        a,
        b,
        dof,
    };
    if !p.is_admissible() {
        return Err(invalid(
            "garch parameters",
            format!("need omega > 0, a, b >= 0, a + b < 1, dof > 2; got {p:?}"),
        ));
    }
    let mut rng = montecarlo::rng(seed);
    let chi = ChiSquared::new(dof).map_err(|e| invalid("dof", e.to_string()))?;
    let unit = ((dof - 2.0) / dof).sqrt();
    let mut h = p.unconditional_variance();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        let t = z / (chi.sample(&mut rng) / dof).sqrt();
        let e = h.sqrt() * t * unit;
        out.push(e);
        h = omega + a * e * e + b * h;
    }
    Ok(out)
}

struct Likelihood<'a> {
    r: &'a [f64],
    s2: f64,
}

impl<'a> Likelihood<'a> {
    fn new(r: &'a [f64]) -> Self {
        Self {
            r,
            s2: sample_variance(r),
        }
    }

    fn log_constant(dof: f64) -> f64 {
        ln_gamma((dof + 1.0) / 2.0) - ln_gamma(dof / 2.0) - 0.5 * (std::f64::consts::PI * (dof - 2.0)).ln()
    }

    fn value(&self, p: &GarchParams) -> f64 {
        if !p.is_admissible() {
            return f64::NEG_INFINITY;
        }
        let c = Self::log_constant(p.dof);
        let mut prev_e2 = self.s2;
        let mut prev_h = self.s2;
        let mut ll = 0.0;
        for r in self.r {
            let h = p.omega + p.a * prev_e2 + p.b * prev_h;
            if !(h > 0.0) {
                return f64::NEG_INFINITY;
            }
            let e = r - p.mu;
            let q = e * e / ((p.dof - 2.0) * h);
            ll += c - 0.5 * h.ln() - 0.5 * (p.dof + 1.0) * q.ln_1p();
            prev_e2 = e * e;
            prev_h = h;
        }
        ll
    }

    /// Log-likelihood and per-observation scores in natural parameters.
    fn scores(&self, p: &GarchParams) -> (f64, Vec<[f64; N_PARAMS]>) {
        let nu = p.dof;
        let c = Self::log_constant(nu);
        let dconst = 0.5 * digamma((nu + 1.0) / 2.0) - 0.5 * digamma(nu / 2.0) - 0.5 / (nu - 2.0);
        let mut prev_e = 0.0;
        let mut prev_e2 = self.s2;
        let mut prev_h = self.s2;
        // dh/d(mu, omega, a, b)
        let mut dh = [0.0; 4];
        let mut ll = 0.0;
        let mut out = Vec::with_capacity(self.r.len());
        for (t, r) in self.r.iter().enumerate() {
            let h = p.omega + p.a * prev_e2 + p.b * prev_h;
            dh = if t == 0 {
                [0.0, 1.0, self.s2, self.s2]
            } else {
                [
                    -2.0 * p.a * prev_e + p.b * dh[0],
                    1.0 + p.b * dh[1],
                    prev_e2 + p.b * dh[2],
                    prev_h + p.b * dh[3],
                ]
            };
            let e = r - p.mu;
            let q = e * e / ((nu - 2.0) * h);
            ll += c - 0.5 * h.ln() - 0.5 * (nu + 1.0) * q.ln_1p();
            let dl_dh = -0.5 / h + 0.5 * (nu + 1.0) * q / (h * (1.0 + q));
            let dl_dmu_direct = (nu + 1.0) * e / ((nu - 2.0) * h * (1.0 + q));
            let dl_dnu = dconst - 0.5 * q.ln_1p() + 0.5 * (nu + 1.0) * q / ((nu - 2.0) * (1.0 + q));
            out.push([
                dl_dh * dh[0] + dl_dmu_direct,
                dl_dh * dh[1],
                dl_dh * dh[2],
                dl_dh * dh[3],
                dl_dnu,
            ]);
            prev_e = e;
            prev_e2 = e * e;
            prev_h = h;
        }
        (ll, out)
    }

    fn gradient(&self, p: &GarchParams) -> [f64; N_PARAMS] {
        let (_, s) = self.scores(p);
        let mut g = [0.0; N_PARAMS];
        for row in &s {
            for i in 0..N_PARAMS {
                g[i] += row[i];
            }
        }
        g
    }
}

/// Log-likelihood of `returns` under `p` (`-inf` when inadmissible).
pub fn log_likelihood(p: &GarchParams, returns: &[f64]) -> f64 {
    Likelihood::new(returns).value(p)
}

/// Analytic gradient of [`log_likelihood`] in `(mu, omega, a, b, dof)` order.
pub fn log_likelihood_gradient(p: &GarchParams, returns: &[f64]) -> [f64; N_PARAMS] {
    Likelihood::new(returns).gradient(p)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Unconstrained coordinates: `(mu, ln omega, logit(a+b), logit(a/(a+b)), ln(dof-2))`.
fn to_free(p: &GarchParams) -> [f64; N_PARAMS] {
    let pers = (p.a + p.b).clamp(1e-8, 1.0 - 1e-8);
    let share = (p.a / (p.a + p.b).max(1e-12)).clamp(1e-8, 1.0 - 1e-8);
    [p.mu, p.omega.ln(), logit(pers), logit(share), (p.dof - 2.0).ln()]
}

fn from_free(th: &[f64]) -> GarchParams {
    let pers = logistic(th[2]);
    let share = logistic(th[3]);
    GarchParams {
        mu: th[0],
        omega: th[1].exp(),
        a: pers * share,
        b: pers * (1.0 - share),
        dof: 2.0 + th[4].exp(),
    }
}

/// `d natural / d free` (row: natural index, column: free index).
fn free_jacobian(th: &[f64]) -> [[f64; N_PARAMS]; N_PARAMS] {
    let pers = logistic(th[2]);
    let share = logistic(th[3]);
    let dp = pers * (1.0 - pers);
    let ds = share * (1.0 - share);
    let mut j = [[0.0; N_PARAMS]; N_PARAMS];
    j[0][0] = 1.0;
    j[1][1] = th[1].exp();
    j[2][2] = share * dp;
    j[2][3] = pers * ds;
    j[3][2] = (1.0 - share) * dp;
    j[3][3] = -pers * ds;
    j[4][4] = th[4].exp();
    j
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    steps: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    let k = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..k {
        let mut v = start.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[k] - values[0]).abs() <= 1e-10 * (1.0 + values[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..k)
            .map(|j| simplex[..k].iter().map(|v| v[j]).sum::<f64>() / k as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[k])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[k] = xe;
                values[k] = fe;
            } else {
                simplex[k] = xr;
                values[k] = fr;
            }
        } else if fr < values[k - 1] {
            simplex[k] = xr;
            values[k] = fr;
        } else {
            let (xc, fc) = if fr < values[k] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < values[k].min(fr) {
                simplex[k] = xc;
                values[k] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=k {
                    simplex[i] = best
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=k).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best], iter)
}

struct BhhhOutcome {
    theta: [f64; N_PARAMS],
    ll: f64,
    iterations: usize,
    converged: bool,
}

fn bhhh(lik: &Likelihood<'_>, start: [f64; N_PARAMS], start_ll: f64, max_iter: usize) -> BhhhOutcome {
    let mut theta = start;
    let mut ll = start_ll;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let p = from_free(&theta);
        let (_, scores) = lik.scores(&p);
        let jac = free_jacobian(&theta);
        let mut g = [0.0; N_PARAMS];
        let mut opg = [0.0; N_PARAMS * N_PARAMS];
        for s in &scores {
            let mut st = [0.0; N_PARAMS];
            for (j, stj) in st.iter_mut().enumerate() {
                *stj = (0..N_PARAMS).map(|i| s[i] * jac[i][j]).sum();
            }
            for i in 0..N_PARAMS {
                g[i] += st[i];
                for j in 0..N_PARAMS {
                    opg[i * N_PARAMS + j] += st[i] * st[j];
                }
            }
        }
        let direction = solve_ridged(&opg, &g);
        let crit: f64 = direction.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if crit.abs() < 1e-8 {
            converged = true;
            break;
        }
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + step * d).collect();
            let v = lik.value(&from_free(&cand));
            if v.is_finite() && v > ll {
                let gain = v - ll;
                // Natural-scale movement: near a boundary (a + b -> 0) the free
                // coordinates drift without bound while the model stops changing.
                let moved = from_free(&cand)
                    .to_vec()
                    .iter()
                    .zip(p.to_vec())
                    .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
                    .fold(0.0, f64::max);
                theta.copy_from_slice(&cand);
                ll = v;
                improved = true;
                if gain < 1e-12 * (1.0 + ll.abs()) {
                    converged = crit.abs() < 1e-3;
                }
                if gain < 1e-9 && moved < 1e-8 {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !improved {
            converged = crit.abs() < 1e-3;
            break;
        }
        if converged {
            break;
        }
    }
    BhhhOutcome {
        theta,
        ll,
        iterations,
        converged,
    }
}

fn solve_ridged(m: &[f64], g: &[f64; N_PARAMS]) -> Vec<f64> {
    let mut ridge = 0.0;
    let scale = (0..N_PARAMS).map(|i| m[i * N_PARAMS + i]).fold(0.0, f64::max).max(1e-300);
    loop {
        let mut a = m.to_vec();
        for i in 0..N_PARAMS {
            a[i * N_PARAMS + i] += ridge * scale;
        }
        if let Some(l) = stats::cholesky(&a, N_PARAMS) {
            return stats::chol_solve(&l, N_PARAMS, g);
        }
        ridge = if ridge == 0.0 { 1e-12 } else { ridge * 10.0 };
        if ridge > 1.0 {
            return g.iter().map(|v| v / scale).collect();
        }
    }
}

fn robust_standard_errors(lik: &Likelihood<'_>, p: &GarchParams) -> GarchStdErrors {
    let none = GarchStdErrors {
        mu: None,
        omega: None,
        a: None,
        b: None,
        dof: None,
    };
    let x = p.to_vec();
    let (_, scores) = lik.scores(p);
    let mut opg = [0.0; N_PARAMS * N_PARAMS];
    for s in &scores {
        for i in 0..N_PARAMS {
            for j in 0..N_PARAMS {
                opg[i * N_PARAMS + j] += s[i] * s[j];
            }
        }
    }
    // Hessian by differencing the analytic gradient; one-sided next to a bound.
    let mut hess = [0.0; N_PARAMS * N_PARAMS];
    let g0 = lik.gradient(p);
    for j in 0..N_PARAMS {
        let h = 1e-5 * x[j].abs().max(1e-3);
        let mut up = x;
        up[j] += h;
        let mut down = x;
        down[j] -= h;
        let pu = GarchParams::from_slice(&up);
        let pd = GarchParams::from_slice(&down);
        let col: Vec<f64> = match (pu.is_admissible(), pd.is_admissible()) {
            (true, true) => {
                let gu = lik.gradient(&pu);
                let gd = lik.gradient(&pd);
                (0..N_PARAMS).map(|i| (gu[i] - gd[i]) / (2.0 * h)).collect()
            }
            (true, false) => {
                let gu = lik.gradient(&pu);
                (0..N_PARAMS).map(|i| (gu[i] - g0[i]) / h).collect()
            }
            (false, true) => {
                let gd = lik.gradient(&pd);
                (0..N_PARAMS).map(|i| (g0[i] - gd[i]) / h).collect()
            }
            (false, false) => return none,
        };
        for i in 0..N_PARAMS {
            hess[i * N_PARAMS + j] = col[i];
        }
    }
    let mut info = vec![0.0; N_PARAMS * N_PARAMS];
    for i in 0..N_PARAMS {
        for j in 0..N_PARAMS {
            info[i * N_PARAMS + j] = -0.5 * (hess[i * N_PARAMS + j] + hess[j * N_PARAMS + i]);
        }
    }
    let Some(inv) = stats::spd_inverse(&info, N_PARAMS) else {
        return none;
    };
    let mut tmp = [0.0; N_PARAMS * N_PARAMS];
    for i in 0..N_PARAMS {
        for j in 0..N_PARAMS {
            tmp[i * N_PARAMS + j] = (0..N_PARAMS).map(|k| inv[i * N_PARAMS + k] * opg[k * N_PARAMS + j]).sum();
        }
    }
    let se = |i: usize| {
        let v: f64 = (0..N_PARAMS).map(|k| tmp[i * N_PARAMS + k] * inv[k * N_PARAMS + i]).sum();
        (v > 0.0 && v.is_finite()).then(|| v.sqrt())
    };
    GarchStdErrors {
        mu: se(0),
        omega: se(1),
        a: se(2),
        b: se(3),
        dof: se(4),
    }
}

/// Fits GARCH(1,1)-t to percent returns (at least 300 observations).
pub fn garch_fit(r: &[f64]) -> Result<GarchFit> {
    if r.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData {
            what: "GARCH fit",
            needed: MIN_OBSERVATIONS,
            got: r.len(),
        });
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(invalid("returns", "non-finite return"));
    }
    let lik = Likelihood::new(r);
    if stats::is_effectively_constant(r) || !(lik.s2 > 0.0) {
        return Err(invalid("returns", "constant series has no variance to model"));
    }
    let start = GarchParams {
        mu: stats::mean(r),
        omega: 0.05 * lik.s2,
        a: 0.05,
        b: 0.90,
        dof: 8.0,
    };
    let theta0 = to_free(&start);
    let sd = lik.s2.sqrt();
    let steps = [0.1 * sd, 0.5, 0.5, 0.5, 0.5];
    let objective = |th: &[f64]| {
        let v = lik.value(&from_free(th));
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };
    let (simplex_theta, simplex_neg, simplex_iterations) =
        nelder_mead(objective, &theta0, &steps, SIMPLEX_MAX_ITER);
    let simplex_ll = -simplex_neg;
    let mut th = [0.0; N_PARAMS];
    th.copy_from_slice(&simplex_theta);
    let outcome = bhhh(&lik, th, simplex_ll, GRADIENT_MAX_ITER);
    let p = from_free(&outcome.theta);
    let robust_se = robust_standard_errors(&lik, &p);
    let sigma_path = conditional_sigma(&p, r, lik.s2);
    let n = r.len();
    let k = N_PARAMS as f64;
    let mut fit = GarchFit {
        mu: p.mu,
        omega: p.omega,
        a: p.a,
        b: p.b,
        dof: p.dof,
        log_likelihood: outcome.ll,
        robust_se,
        sigma_path,
        converged: outcome.converged,
        non_stationary: p.a + p.b > 1.0 - 1e-6,
        simplex_log_likelihood: simplex_ll,
        simplex_iterations,
        gradient_iterations: outcome.iterations,
        presample_variance: lik.s2,
        aic: -2.0 * outcome.ll + 2.0 * k,
        bic: -2.0 * outcome.ll + k * (n as f64).ln(),
        n,
        diagnostics: None,
    };
    let z = fit.standardized_residuals(r);
    let z2: Vec<f64> = z.iter().map(|v| v * v).collect();
    let lags = 10.min(n / 4 - 1);
    if let (Ok(levels), Ok(squares)) = (ljung_box(&z, lags), ljung_box(&z2, lags)) {
        fit.diagnostics = Some(GarchDiagnostics {
            standardized_residuals: levels,
            squared_standardized_residuals: squares,
        });
    }
    Ok(fit)
}

/// Ljung-Box portmanteau statistic with a chi-square(`lags`) reference.
pub fn ljung_box(x: &[f64], lags: usize) -> Result<LjungBoxResult> {
    let n = x.len();
    if lags == 0 || 4 * lags >= n {
        return Err(invalid("lags", format!("need 1 <= lags < n/4, got {lags} for n = {n}")));
    }
    let rho = stats::autocorrelations(x, lags);
    let nf = n as f64;
    let statistic = if !stats::is_effectively_constant(x) && rho.iter().all(|r| r.is_finite()) {
        nf * (nf + 2.0)
            * rho
                .iter()
                .enumerate()
                .map(|(k, r)| r * r / (nf - (k + 1) as f64))
                .sum::<f64>()
    } else {
        0.0
    };
    let chi = ChiSquaredDist::new(lags as f64).map_err(|e| invalid("lags", e.to_string()))?;
    let critical = chi.inverse_cdf(0.95);
    Ok(LjungBoxResult {
        statistic,
        lags,
        critical_value_5pct: critical,
        p_value: chi.sf(statistic),
        reject_5pct: statistic > critical,
    })
}
