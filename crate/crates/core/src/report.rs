//! End-to-end pipeline: configuration, per-series analysis, and the CSV/JSON
//! table emitters.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evd::{self, DistSpec};
use crate::garch::{self, GarchFit};
use crate::montecarlo::{self, Execution};
use crate::risk::{self, ProbabilityGrid, QuantileGrid};
use crate::series::{self, CsvFormat, RateSeries, ReturnSeries, SummaryStats};
use crate::stationarity::{self, Deterministic, UnitRootResult, UnitRootTest};
use crate::tail::{self, Extremes, Side, TailEstimate, TailTestResult, ThresholdSelection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Summary,
    UnitRoot,
    Tails,
    Quantiles,
    Probabilities,
    Garch,
}

impl Section {
    pub const ALL: [Section; 6] = [
        Section::Summary,
        Section::UnitRoot,
        Section::Tails,
        Section::Quantiles,
        Section::Probabilities,
        Section::Garch,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown format `{other}` (csv | json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub label: String,
    pub path: PathBuf,
}

impl FromStr for InputSpec {
    type Err = Error;

    /// `LABEL=PATH` or a bare path labelled by its file stem.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty input".into()));
        }
        if let Some((label, path)) = s.split_once('=') {
            let (label, path) = (label.trim(), path.trim());
            if label.is_empty() || path.is_empty() {
                return Err(Error::Config(format!("malformed input `{s}`")));
            }
            return Ok(Self {
                label: label.to_string(),
                path: PathBuf::from(path),
            });
        }
        let path = PathBuf::from(s);
        let label = path
            .file_stem()
            .map(|x| x.to_string_lossy().into_owned())
            .unwrap_or_else(|| s.to_string());
        Ok(Self { label, path })
    }
}

/// Probability grid selection: the default depends on each period's size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilitySpec {
    /// `{0.05, 0.01, 0.005, 1/n, 1/(2n), 1/(4n)}`.
    Default,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub inputs: Vec<InputSpec>,
    pub split: Option<NaiveDate>,
    pub sides: Vec<Side>,
    pub probabilities: ProbabilitySpec,
    pub levels: Vec<f64>,
    pub format: OutputFormat,
    pub trace: bool,
    pub seed: u64,
    pub sections: BTreeSet<Section>,
    pub ljung_box_lags: usize,
    pub extremes_k: usize,
    /// ADF lag cap; `None` uses `floor(12 (n/100)^(1/4))` per period.
    pub adf_max_lag: Option<usize>,
    pub delimiter: char,
    /// Options that were not given explicitly and took their default.
    pub defaulted: Vec<String>,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::Config("at least one input is required".into()));
        }
        if self.sides.is_empty() {
            return Err(Error::Config("tail side list is empty".into()));
        }
        if self.levels.is_empty() || self.levels.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Config("exceedance levels must be a non-empty list of positive numbers".into()));
        }
        if let ProbabilitySpec::Fixed(p) = &self.probabilities {
            if p.is_empty() || p.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
                return Err(Error::Config("quantile probabilities must be a non-empty list in (0, 1)".into()));
            }
        }
        if self.sections.is_empty() {
            return Err(Error::Config("no report section selected".into()));
        }
        let labels: BTreeSet<&str> = self.inputs.iter().map(|i| i.label.as_str()).collect();
        if labels.len() != self.inputs.len() {
            return Err(Error::Config("input labels must be unique".into()));
        }
        Ok(())
    }
}

/// Partially specified configuration, from a config file or from flags.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    pub inputs: Vec<InputSpec>,
    pub split: Option<NaiveDate>,
    pub sides: Option<Vec<Side>>,
    pub probabilities: Option<Vec<f64>>,
    pub levels: Option<Vec<f64>>,
    pub format: Option<OutputFormat>,
    pub trace: Option<bool>,
    pub seed: Option<u64>,
    pub ljung_box_lags: Option<usize>,
    pub extremes_k: Option<usize>,
    pub adf_max_lag: Option<usize>,
    pub delimiter: Option<char>,
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse `{s}`")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| Error::Config(format!("invalid date `{s}`: {e}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got `{v}`"))),
    }
}

impl ConfigBuilder {
    /// Parses line-oriented `key = value` text. `#` starts a comment line;
    /// `input` may repeat.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut b = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            b.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(b)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "input" => self.inputs.push(v.parse()?),
            "split" | "boundary" => self.split = Some(parse_date(v)?),
            "sides" => self.sides = Some(parse_list(key, v)?),
            "probs" | "probabilities" => self.probabilities = Some(parse_list(key, v)?),
            "levels" => self.levels = Some(parse_list(key, v)?),
            "format" => self.format = Some(v.parse()?),
            "trace" => self.trace = Some(parse_bool(key, v)?),
            "seed" => self.seed = Some(parse_one(key, v)?),
            "lags" | "ljung_box_lags" => self.ljung_box_lags = Some(parse_one(key, v)?),
            "extremes" => self.extremes_k = Some(parse_one(key, v)?),
            "max_lag" => self.adf_max_lag = Some(parse_one(key, v)?),
            "delimiter" => {
                let mut chars = v.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => self.delimiter = Some(c),
                    _ => return Err(Error::Config(format!("delimiter must be one character, got `{v}`"))),
                }
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// `other` wins wherever it specifies a value; its inputs replace ours
    /// when non-empty.
    pub fn overlay(mut self, other: ConfigBuilder) -> Self {
        if !other.inputs.is_empty() {
            self.inputs = other.inputs;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(split, sides, probabilities, levels, format, trace, seed, ljung_box_lags, extremes_k, adf_max_lag, delimiter);
        self
    }

    pub fn build(self, sections: BTreeSet<Section>) -> Result<AnalysisConfig> {
        let mut defaulted = Vec::new();
        macro_rules! or_default {
            ($field:expr, $name:literal, $default:expr) => {
                match $field {
                    Some(v) => v,
                    None => {
                        defaulted.push(format!("{} = {}", $name, stringify!($default)));
                        $default
                    }
                }
            };
        }
        let sides = or_default!(self.sides, "sides", vec![Side::Lower, Side::Upper, Side::Both]);
        let probabilities = match self.probabilities {
            Some(p) => ProbabilitySpec::Fixed(p),
            None => {
                defaulted.push("probabilities = {0.05, 0.01, 0.005, 1/n, 1/(2n), 1/(4n)}".into());
                ProbabilitySpec::Default
            }
        };
        let levels = or_default!(self.levels, "levels", risk::default_levels());
        let format = or_default!(self.format, "format", OutputFormat::Json);
        let trace = or_default!(self.trace, "trace", false);
        let seed = or_default!(self.seed, "seed", 0);
        let ljung_box_lags = or_default!(self.ljung_box_lags, "ljung_box_lags", 10);
        let extremes_k = or_default!(self.extremes_k, "extremes", 5);
        let delimiter = or_default!(self.delimiter, "delimiter", ',');
        if self.adf_max_lag.is_none() {
            defaulted.push("max_lag = floor(12 (n/100)^(1/4)) per period".into());
        }
        if self.split.is_none() {
            defaulted.push("split = none (single full period)".into());
        }
        let cfg = AnalysisConfig {
            inputs: self.inputs,
            split: self.split,
            sides,
            probabilities,
            levels,
            format,
            trace,
            seed,
            sections,
            ljung_box_lags,
            extremes_k,
            adf_max_lag: self.adf_max_lag,
            delimiter,
            defaulted,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Outcome of one report section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "result", rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    Degraded(String),
    Skipped,
}

impl<T> Outcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Degraded(e.to_string()),
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_degraded(&self) -> bool {
        matches!(self, Outcome::Degraded(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootSet {
    pub adf: Outcome<UnitRootResult>,
    pub pp_zt: Outcome<UnitRootResult>,
    pub pp_zrho: Outcome<UnitRootResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootTable {
    /// Tests on log levels.
    pub levels: UnitRootSet,
    /// Tests on percent returns.
    pub returns: UnitRootSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub side: Side,
    pub estimate: Outcome<TailEstimate>,
    /// Threshold came from `floor(n^(2/3))` instead of the adaptive rule.
    pub fallback_used: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection: Option<ThresholdSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTests {
    /// Upper minus lower tail index.
    pub symmetry: Option<TailTestResult>,
    /// Combined tail, H0 alpha <= 2.
    pub stable_family: Option<TailTestResult>,
    /// Combined tail, H0 alpha >= 2.
    pub finite_variance: Option<TailTestResult>,
    /// Combined tail, H0 alpha >= 4.
    pub finite_kurtosis: Option<TailTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSection {
    pub rows: Vec<TailRow>,
    pub tests: TailTests,
    pub extremes: Outcome<Extremes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSection {
    pub fit: GarchFit,
    pub t_stats: [Option<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    /// `FULL`, `PRE` or `POST`.
    pub period: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub n_returns: usize,
    pub summary: Outcome<SummaryStats>,
    pub unit_roots: Outcome<UnitRootTable>,
    pub tails: Outcome<TailSection>,
    pub quantiles: Outcome<Vec<QuantileGrid>>,
    pub probabilities: Outcome<Vec<ProbabilityGrid>>,
    pub garch: Outcome<GarchSection>,
}

impl PeriodReport {
    fn degraded_sections(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        macro_rules! check {
            ($f:ident) => {
                if let Outcome::Degraded(r) = &self.$f {
                    out.push((stringify!($f), r.clone()));
                }
            };
        }
        check!(summary);
        check!(unit_roots);
        check!(tails);
        check!(quantiles);
        check!(probabilities);
        check!(garch);
        if let Outcome::Ok(t) = &self.tails {
            for row in &t.rows {
                if let Outcome::Degraded(r) = &row.estimate {
                    out.push(("tails", format!("{} tail: {r}", row.side)));
                }
            }
            if let Outcome::Degraded(r) = &t.extremes {
                out.push(("tails", format!("extremes: {r}")));
            }
        }
        if let Outcome::Ok(u) = &self.unit_roots {
            for (which, set) in [("levels", &u.levels), ("returns", &u.returns)] {
                for (name, o) in [("adf", &set.adf), ("pp_zt", &set.pp_zt), ("pp_zrho", &set.pp_zrho)] {
                    if let Outcome::Degraded(r) = o {
                        out.push(("unit_roots", format!("{name} on {which}: {r}")));
                    }
                }
            }
        }
        if let Outcome::Ok(g) = &self.garch {
            if !g.fit.converged {
                out.push(("garch", "optimizer did not converge; best parameters reported".into()));
            }
            if g.fit.non_stationary {
                out.push(("garch", "a + b at the stationarity boundary".into()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub label: String,
    pub source: PathBuf,
    pub n_levels: usize,
    pub periods: Vec<PeriodReport>,
}

/// Pairwise signed stability statistics between the combined-tail estimates
/// of every (series, period); `statistics[i][j] = z(estimate_i, estimate_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMatrix {
    pub side: Side,
    pub labels: Vec<String>,
    pub statistics: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationRecord {
    pub path: String,
    pub operation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub config: AnalysisConfig,
    pub methods: Vec<(String, String)>,
    pub threshold_fallbacks: Vec<String>,
    pub degraded: Vec<String>,
    pub operations: Vec<OperationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub series: Vec<SeriesReport>,
    pub stability: Option<StabilityMatrix>,
    pub metadata: Metadata,
}

impl ReportBundle {
    pub fn has_degraded(&self) -> bool {
        !self.metadata.degraded.is_empty()
    }
}

struct Loaded {
    spec: InputSpec,
    rates: RateSeries,
}

fn load_input(spec: &InputSpec, delimiter: char) -> Result<Loaded> {
    let file = fs::File::open(&spec.path)
        .map_err(|e| Error::Io(format!("cannot open {}: {e}", spec.path.display())))?;
    let rates = series::load_series(BufReader::new(file), CsvFormat { delimiter }, spec.label.clone())
        .map_err(|e| Error::Io(format!("{}: {e}", spec.path.display())))?;
    Ok(Loaded {
        spec: spec.clone(),
        rates,
    })
}

fn unit_root_set(x: &[f64], max_lag: Option<usize>) -> UnitRootSet {
    let lag = max_lag.unwrap_or_else(|| stationarity::default_max_lag(x.len()));
    UnitRootSet {
        adf: Outcome::from_result(stationarity::adf_test(x, lag, Deterministic::Constant)),
        pp_zt: Outcome::from_result(stationarity::pp_test(x, UnitRootTest::PpZt)),
        pp_zrho: Outcome::from_result(stationarity::pp_test(x, UnitRootTest::PpZrho)),
    }
}

fn combined_side(sides: &[Side]) -> Side {
    if sides.contains(&Side::Both) {
        Side::Both
    } else {
        sides[0]
    }
}

fn analyze_period(
    cfg: &AnalysisConfig,
    period: &str,
    log_levels: &[f64],
    returns: &ReturnSeries,
) -> PeriodReport {
    let wants = |s: Section| cfg.sections.contains(&s);
    let n = returns.len();
    let summary = if wants(Section::Summary) {
        Outcome::from_result(series::summary_stats(returns))
    } else {
        Outcome::Skipped
    };
    let unit_roots = if wants(Section::UnitRoot) {
        Outcome::Ok(UnitRootTable {
            levels: unit_root_set(log_levels, cfg.adf_max_lag),
            returns: unit_root_set(returns.values(), cfg.adf_max_lag),
        })
    } else {
        Outcome::Skipped
    };

    let need_tails = wants(Section::Tails) || wants(Section::Quantiles) || wants(Section::Probabilities);
    let mut rows = Vec::new();
    if need_tails {
        for &side in &cfg.sides {
            let r = tail::estimate_tail_traced(returns, side);
            let (estimate, fallback_used, selection) = match r {
                Ok((e, s)) => (Outcome::Ok(e), s.fallback_used, cfg.trace.then_some(s)),
                Err(e) => (Outcome::Degraded(e.to_string()), false, None),
            };
            rows.push(TailRow {
                side,
                estimate,
                fallback_used,
                selection,
            });
        }
    }
    let find = |side: Side| {
        rows.iter()
            .find(|r| r.side == side)
            .and_then(|r| r.estimate.ok().cloned())
    };
    let combined = find(combined_side(&cfg.sides));
    let tails = if need_tails {
        let symmetry = match (find(Side::Upper), find(Side::Lower)) {
            (Some(u), Some(l)) => Some(tail::tail_stability(&u, &l)),
            _ => None,
        };
        let tests = TailTests {
            symmetry,
            stable_family: combined.as_ref().map(tail::stable_family_test),
            finite_variance: combined.as_ref().and_then(|c| tail::moment_test(c, 2.0).ok()),
            finite_kurtosis: combined.as_ref().and_then(|c| tail::moment_test(c, 4.0).ok()),
        };
        Outcome::Ok(TailSection {
            rows: rows.clone(),
            tests,
            extremes: Outcome::from_result(tail::top_extremes(returns, cfg.extremes_k)),
        })
    } else {
        Outcome::Skipped
    };

    let estimates: Vec<TailEstimate> = rows.iter().filter_map(|r| r.estimate.ok().cloned()).collect();
    let no_estimate = || Error::Unsupported("no tail estimate available for this period".into());
    let quantiles = if wants(Section::Quantiles) {
        let probs = match &cfg.probabilities {
            ProbabilitySpec::Default => risk::default_probabilities(n),
            ProbabilitySpec::Fixed(p) => p.clone(),
        };
        if estimates.is_empty() {
            Outcome::Degraded(no_estimate().to_string())
        } else {
            Outcome::from_result(estimates.iter().map(|e| risk::quantile_grid(e, &probs)).collect())
        }
    } else {
        Outcome::Skipped
    };
    let probabilities = if wants(Section::Probabilities) {
        if estimates.is_empty() {
            Outcome::Degraded(no_estimate().to_string())
        } else {
            Outcome::from_result(
                estimates
                    .iter()
                    .map(|e| risk::probability_grid(e, &cfg.levels))
                    .collect(),
            )
        }
    } else {
        Outcome::Skipped
    };
    let garch = if wants(Section::Garch) {
        Outcome::from_result(garch::garch_fit(returns.values()).map(|fit| {
            let se = fit.robust_se;
            let t = |v: f64, s: Option<f64>| s.map(|s| v / s);
            let t_stats = [t(fit.omega, se.omega), t(fit.a, se.a), t(fit.b, se.b)];
            GarchSection { fit, t_stats }
        }))
    } else {
        Outcome::Skipped
    };
    PeriodReport {
        period: period.to_string(),
        start: returns.dates()[0],
        end: *returns.dates().last().expect("non-empty period"),
        n_returns: n,
        summary,
        unit_roots,
        tails,
        quantiles,
        probabilities,
        garch,
    }
}

fn analyze_series(cfg: &AnalysisConfig, input: &Loaded) -> Result<SeriesReport> {
    let returns = series::log_returns(&input.rates)?;
    let obs = input.rates.observations();
    let periods = match cfg.split {
        None => {
            let logs = input.rates.log_levels();
            vec![analyze_period(cfg, "FULL", &logs, &returns)]
        }
        Some(boundary) => {
            let (pre, post) = series::split_period(&returns, boundary).map_err(|e| match e {
                Error::EmptySplit { side, .. } => Error::EmptySplit {
                    boundary: format!("{boundary} ({})", input.spec.label),
                    side,
                },
                other => other,
            })?;
            let pre_levels: Vec<f64> = obs.iter().filter(|o| o.date < boundary).map(|o| o.level.ln()).collect();
            let post_levels: Vec<f64> = obs.iter().filter(|o| o.date >= boundary).map(|o| o.level.ln()).collect();
            vec![
                analyze_period(cfg, "PRE", &pre_levels, &pre),
                analyze_period(cfg, "POST", &post_levels, &post),
            ]
        }
    };
    Ok(SeriesReport {
        label: input.spec.label.clone(),
        source: input.spec.path.clone(),
        n_levels: input.rates.len(),
        periods,
    })
}

fn stability_matrix(cfg: &AnalysisConfig, series: &[SeriesReport]) -> Option<StabilityMatrix> {
    let side = combined_side(&cfg.sides);
    let mut labels = Vec::new();
    let mut estimates = Vec::new();
    for s in series {
        for p in &s.periods {
            if let Some(t) = p.tails.ok() {
                if let Some(e) = t.rows.iter().find(|r| r.side == side).and_then(|r| r.estimate.ok()) {
                    labels.push(format!("{} {}", s.label, p.period));
                    estimates.push(e.clone());
                }
            }
        }
    }
    if estimates.is_empty() {
        return None;
    }
    let statistics = estimates
        .iter()
        .map(|a| estimates.iter().map(|b| tail::tail_stability(a, b).statistic).collect())
        .collect();
    Some(StabilityMatrix {
        side,
        labels,
        statistics,
    })
}

fn operations_for(s: &SeriesReport, cfg: &AnalysisConfig) -> Vec<OperationRecord> {
    let mut ops = Vec::new();
    let mut push = |path: String, operation: String| ops.push(OperationRecord { path, operation });
    for p in &s.periods {
        let base = format!("{}/{}", s.label, p.period);
        if !matches!(p.summary, Outcome::Skipped) {
            push(format!("{base}/summary"), "summary_stats(returns)".into());
        }
        if !matches!(p.unit_roots, Outcome::Skipped) {
            let lag = cfg
                .adf_max_lag
                .map(|l| l.to_string())
                .unwrap_or_else(|| "default".into());
            for which in ["levels", "returns"] {
                push(format!("{base}/unit_roots/{which}/adf"), format!("adf_test(log {which}, max_lag={lag}, constant)"));
                push(format!("{base}/unit_roots/{which}/pp_zt"), format!("pp_test({which}, Z_t)"));
                push(format!("{base}/unit_roots/{which}/pp_zrho"), format!("pp_test({which}, Z_rho)"));
            }
        }
        if let Outcome::Ok(t) = &p.tails {
            for row in &t.rows {
                push(
                    format!("{base}/tails/{}", row.side),
                    format!("estimate_tail(returns, {}) = hill_gamma(tail_sample, select_threshold.m_star)", row.side),
                );
            }
            push(format!("{base}/tails/tests/symmetry"), "tail_stability(upper, lower)".into());
            push(format!("{base}/tails/tests/stable_family"), "stable_family_test(combined)".into());
            push(format!("{base}/tails/tests/finite_variance"), "moment_test(combined, 2)".into());
            push(format!("{base}/tails/tests/finite_kurtosis"), "moment_test(combined, 4)".into());
            push(format!("{base}/tails/extremes"), format!("top_extremes(returns, {})", cfg.extremes_k));
        }
        if !matches!(p.quantiles, Outcome::Skipped) {
            push(format!("{base}/quantiles"), "quantile_grid(estimate, probabilities)".into());
        }
        if !matches!(p.probabilities, Outcome::Skipped) {
            push(format!("{base}/probabilities"), "probability_grid(estimate, levels)".into());
        }
        if !matches!(p.garch, Outcome::Skipped) {
            push(format!("{base}/garch"), "garch_fit(returns)".into());
        }
    }
    ops
}

fn methods() -> Vec<(String, String)> {
    vec![
        ("returns".into(), "100 * (ln s_t - ln s_{t-1}); calendar gaps ignored".into()),
        ("moments".into(), "n-denominator; skew_z = skew/sqrt(6/n), kurt_z = kurt/sqrt(24/n)".into()),
        ("quartiles".into(), "linear interpolation between order statistics".into()),
        ("normality".into(), series::SUMMARY_KS_METHOD.into()),
        ("adf".into(), format!("constant only, AIC lag choice, critical values: {}", stationarity::ADF_CV_SOURCE)),
        ("pp".into(), format!("Bartlett kernel, bandwidth floor(4 (n/100)^(2/9)); Z_t: {}; Z_rho: {}", stationarity::ADF_CV_SOURCE, stationarity::ZRHO_CV_SOURCE)),
        ("tail_index".into(), "Hill on non-zero magnitudes; m* = round(lambda n^(2/3)) clamped to [2, n/2], preliminary m1 = n^0.6, m2 = n^0.9; fallback floor(n^(2/3))".into()),
        ("stability".into(), "signed z = (alpha_a - alpha_b)/sqrt(alpha_a^2/m_a + alpha_b^2/m_b), critical 1.96".into()),
        ("moment_tests".into(), "z = (alpha - k) sqrt(m)/alpha, one-sided critical 1.645".into()),
        ("quantiles".into(), "r_p = r_(n-m) (m/(n p))^(1/alpha)".into()),
        ("exceedance".into(), "P = (m/n)(x/r_(n-m))^(-alpha), capped at m/n below the threshold; CSV in percent".into()),
        ("garch".into(), format!("GARCH(1,1)-t, constant mean, presample variance = sample variance; simplex ({} iter) then BHHH ({} iter); Bollerslev-Wooldridge SEs", garch::SIMPLEX_MAX_ITER, garch::GRADIENT_MAX_ITER)),
    ]
}

/// Runs every requested section for every input. Inputs are all read before
/// any computation; per-section failures are recorded, not propagated.
pub fn run_pipeline(cfg: &AnalysisConfig) -> Result<ReportBundle> {
    run_pipeline_with(cfg, Execution::default())
}

pub fn run_pipeline_with(cfg: &AnalysisConfig, exec: Execution) -> Result<ReportBundle> {
    cfg.validate()?;
    let loaded = cfg
        .inputs
        .iter()
        .map(|spec| load_input(spec, cfg.delimiter))
        .collect::<Result<Vec<_>>>()?;
    let series = montecarlo::map_items(&loaded, exec, |l| analyze_series(cfg, l))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let stability = if cfg.sections.contains(&Section::Tails) {
        stability_matrix(cfg, &series)
    } else {
        None
    };
    let mut degraded = Vec::new();
    let mut fallbacks = Vec::new();
    let mut operations = Vec::new();
    for s in &series {
        operations.extend(operations_for(s, cfg));
        for p in &s.periods {
            for (section, reason) in p.degraded_sections() {
                degraded.push(format!("{}/{}/{section}: {reason}", s.label, p.period));
            }
            if let Outcome::Ok(t) = &p.tails {
                for row in &t.rows {
                    if row.fallback_used {
                        fallbacks.push(format!("{}/{}/{}", s.label, p.period, row.side));
                    }
                }
            }
        }
    }
    Ok(ReportBundle {
        series,
        stability,
        metadata: Metadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: cfg.clone(),
            methods: methods(),
            threshold_fallbacks: fallbacks,
            degraded,
            operations,
        },
    })
}

/// One named output table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub content: String,
}

pub fn to_json(bundle: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(bundle).expect("report bundle serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<ReportBundle> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        record: e.line(),
        reason: e.to_string(),
    })
}

fn f2(x: f64) -> String {
    format!("{x:.2}")
}

fn f3(x: f64) -> String {
    format!("{x:.3}")
}

fn opt(x: Option<f64>, fmt: fn(f64) -> String) -> String {
    x.map(fmt).unwrap_or_default()
}

fn periods(bundle: &ReportBundle) -> impl Iterator<Item = (&SeriesReport, &PeriodReport)> {
    bundle
        .series
        .iter()
        .flat_map(|s| s.periods.iter().map(move |p| (s, p)))
}

fn row(out: &mut String, cells: &[String]) {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(cells).expect("writing to memory cannot fail");
    let bytes = w.into_inner().expect("flushing to memory cannot fail");
    out.push_str(std::str::from_utf8(&bytes).expect("cells are UTF-8"));
}

fn table_unit_roots(bundle: &ReportBundle) -> Option<Table> {
    let mut out = String::new();
    row(
        &mut out,
        &[
            "label", "period", "adf_levels", "pp_zt_levels", "pp_zrho_levels", "adf_returns", "pp_zt_returns",
            "pp_zrho_returns", "rejects_5pct",
        ]
        .map(String::from),
    );
    let mut any = false;
    for (s, p) in periods(bundle) {
        let Some(u) = p.unit_roots.ok() else { continue };
        any = true;
        let mut cells = vec![s.label.clone(), p.period.clone()];
        let mut rejects = Vec::new();
        for (which, set) in [("levels", &u.levels), ("returns", &u.returns)] {
            for (name, o) in [("adf", &set.adf), ("pp_zt", &set.pp_zt), ("pp_zrho", &set.pp_zrho)] {
                let r = o.ok();
                cells.push(opt(r.map(|r| r.statistic), f2));
                if r.is_some_and(|r| r.reject_5pct) {
                    rejects.push(format!("{name}_{which}"));
                }
            }
        }
        cells.push(rejects.join(";"));
        row(&mut out, &cells);
    }
    any.then(|| Table {
        name: "table1_unitroot.csv".into(),
        content: out,
    })
}

fn table_summary(bundle: &ReportBundle) -> Option<Table> {
    let mut out = String::new();
    row(
        &mut out,
        &[
            "label", "period", "n", "mean", "sd", "range", "iqr", "skew", "kurt", "ks", "skew_z", "kurt_z", "ks_critical_5pct",
            "skew_reject", "kurt_reject", "ks_reject",
        ]
        .map(String::from),
    );
    let mut any = false;
    for (s, p) in periods(bundle) {
        let Some(m) = p.summary.ok() else { continue };
        any = true;
        let b = |x: Option<bool>| x.map(|v| v.to_string()).unwrap_or_default();
        row(
            &mut out,
            &[
                s.label.clone(),
                p.period.clone(),
                m.n.to_string(),
                f3(m.mean),
                f3(m.standard_deviation),
                f3(m.range),
                f3(m.interquartile_range),
                opt(m.skewness, f3),
                opt(m.excess_kurtosis, f3),
                opt(m.ks_statistic, f3),
                opt(m.skew_z, f3),
                opt(m.kurt_z, f3),
                f3(m.ks_critical_5pct),
                b(m.skew_significant_5pct),
                b(m.kurt_significant_5pct),
                b(m.ks_reject_5pct),
            ],
        );
    }
    any.then(|| Table {
        name: "table2_summary.csv".into(),
        content: out,
    })
}

fn side_columns(bundle: &ReportBundle) -> Vec<Side> {
    bundle.metadata.config.sides.clone()
}

fn table_tails(bundle: &ReportBundle) -> Option<Table> {
    let sides = side_columns(bundle);
    let mut out = String::new();
    let mut header = vec!["label".to_string(), "period".to_string()];
    for s in &sides {
        header.push(format!("alpha_{s}"));
        header.push(format!("se_{s}"));
        header.push(format!("m_{s}"));
    }
    header.extend(
        ["symmetry_z", "stable_family_z", "finite_variance_z", "finite_kurtosis_z"].map(String::from),
    );
    row(&mut out, &header);
    let mut any = false;
    for (s, p) in periods(bundle) {
        let Some(t) = p.tails.ok() else { continue };
        any = true;
        let mut cells = vec![s.label.clone(), p.period.clone()];
        for side in &sides {
            let e = t.rows.iter().find(|r| r.side == *side).and_then(|r| r.estimate.ok());
            cells.push(opt(e.map(|e| e.alpha), f2));
            cells.push(opt(e.map(|e| e.se_alpha), f2));
            cells.push(e.map(|e| e.m.to_string()).unwrap_or_default());
        }
        for test in [&t.tests.symmetry, &t.tests.stable_family, &t.tests.finite_variance, &t.tests.finite_kurtosis] {
            cells.push(opt(test.as_ref().map(|x| x.statistic), f2));
        }
        row(&mut out, &cells);
    }
    any.then(|| Table {
        name: "table3_tails.csv".into(),
        content: out,
    })
}

fn table_extremes(bundle: &ReportBundle) -> Option<Table> {
    let k = bundle.metadata.config.extremes_k;
    let mut out = String::new();
    let mut header = vec!["label".to_string(), "period".to_string(), "kind".to_string()];
    for i in 1..=k {
        header.push(format!("date_{i}"));
        header.push(format!("return_{i}"));
    }
    row(&mut out, &header);
    let mut any = false;
    for (s, p) in periods(bundle) {
        let Some(x) = p.tails.ok().and_then(|t| t.extremes.ok()) else { continue };
        any = true;
        for (kind, list) in [("lowest", &x.lowest), ("highest", &x.highest)] {
            let mut cells = vec![s.label.clone(), p.period.clone(), kind.to_string()];
            for d in list {
                cells.push(d.date.to_string());
                cells.push(f2(d.value));
            }
            row(&mut out, &cells);
        }
    }
    any.then(|| Table {
        name: "table4_extremes.csv".into(),
        content: out,
    })
}

fn table_stability(bundle: &ReportBundle) -> Option<Table> {
    let m = bundle.stability.as_ref()?;
    let mut out = String::new();
    let mut header = vec![String::new()];
    header.extend(m.labels.iter().cloned());
    row(&mut out, &header);
    for (label, stats) in m.labels.iter().zip(&m.statistics) {
        let mut cells = vec![label.clone()];
        cells.extend(stats.iter().map(|z| f2(*z)));
        row(&mut out, &cells);
    }
    Some(Table {
        name: "table5_stability.csv".into(),
        content: out,
    })
}

fn percent_label(p: f64) -> String {
    let c = 100.0 * (1.0 - p);
    format!("r_p({})", trim_float(c))
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn table_quantiles(bundle: &ReportBundle) -> Option<Table> {
    let mut out = String::new();
    let default = matches!(bundle.metadata.config.probabilities, ProbabilitySpec::Default);
    let header_probs: Vec<String> = match &bundle.metadata.config.probabilities {
        ProbabilitySpec::Default => ["r_p(95)", "r_p(99)", "r_p(99.5)", "r_p(1/n)", "r_p(1/2n)", "r_p(1/4n)"]
            .map(String::from)
            .to_vec(),
        ProbabilitySpec::Fixed(p) => p.iter().map(|&p| percent_label(p)).collect(),
    };
    let mut header = vec!["label".to_string(), "period".to_string(), "side".to_string()];
    header.extend(header_probs.iter().cloned());
    row(&mut out, &header);
    let mut any = false;
    for (s, p) in periods(bundle) {
        let Some(grids) = p.quantiles.ok() else { continue };
        any = true;
        let probs = match &bundle.metadata.config.probabilities {
            ProbabilitySpec::Default => risk::default_probabilities(p.n_returns),
            ProbabilitySpec::Fixed(v) => v.clone(),
        };
        for g in grids {
            let mut cells = vec![s.label.clone(), p.period.clone(), g.estimate.side.to_string()];
            for &prob in &probs {
                let e = g.entries.iter().find(|e| e.tail_probability == prob);
                cells.push(opt(e.map(|e| e.return_level), f2));
            }
            debug_assert!(!default || probs.len() == header_probs.len());
            row(&mut out, &cells);
        }
    }
    any.then(|| Table {
        name: "table6_quantiles.csv".into(),
        content: out,
    })
}

fn table_probabilities(bundle: &ReportBundle) -> Option<Table> {
    let levels = &bundle.metadata.config.levels;
    let mut out = String::new();
    let mut header = vec!["label".to_string(), "period".to_string(), "side".to_string()];
    header.extend(levels.iter().map(|x| format!("P(r>{}%)", trim_float(*x))));
    row(&mut out, &header);
    let mut any = false;
    for (s, p) in periods(bundle) {
        let Some(grids) = p.probabilities.ok() else { continue };
        any = true;
        for g in grids {
            let mut cells = vec![s.label.clone(), p.period.clone(), g.estimate.side.to_string()];
            for &x in levels {
                let e = g.entries.iter().find(|e| e.level == x);
                cells.push(opt(e.map(|e| 100.0 * e.exceed_prob), f3));
            }
            row(&mut out, &cells);
        }
    }
    any.then(|| Table {
        name: "table7_probabilities.csv".into(),
        content: out,
    })
}

fn table_garch(bundle: &ReportBundle) -> Option<Table> {
    let mut out = String::new();
    row(
        &mut out,
        &[
            "label", "period", "n", "mu", "omega", "a", "b", "dof", "se_mu", "se_omega", "se_a", "se_b", "se_dof", "t_omega",
            "t_a", "t_b", "log_likelihood", "aic", "bic", "converged", "lb_q", "lb_q_reject", "lb_q2", "lb_q2_reject",
        ]
        .map(String::from),
    );
    let mut any = false;
    for (s, p) in periods(bundle) {
        let Some(g) = p.garch.ok() else { continue };
        any = true;
        let f = &g.fit;
        let se = &f.robust_se;
        let d = &f.diagnostics;
        let mut cells = vec![
            s.label.clone(),
            p.period.clone(),
            f.n.to_string(),
            f3(f.mu),
            f3(f.omega),
            f3(f.a),
            f3(f.b),
            f2(f.dof),
        ];
        for x in [se.mu, se.omega, se.a, se.b, se.dof] {
            cells.push(opt(x, f3));
        }
        for x in g.t_stats {
            cells.push(opt(x, f2));
        }
        cells.extend([f2(f.log_likelihood), f2(f.aic), f2(f.bic), f.converged.to_string()]);
        match d {
            Some(d) => {
                for lb in [&d.standardized_residuals, &d.squared_standardized_residuals] {
                    cells.extend([f2(lb.statistic), lb.reject_5pct.to_string()]);
                }
            }
            None => cells.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row(&mut out, &cells);
    }
    any.then(|| Table {
        name: "garch.csv".into(),
        content: out,
    })
}

/// `(date, value)` files for level, return and volatility plots.
fn plot_tables(bundle: &ReportBundle, loaded: &[(String, RateSeries)]) -> Vec<Table> {
    let mut tables = Vec::new();
    let slug = |s: &str| s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect::<String>();
    for (label, rates) in loaded {
        let mut lv = String::from("date,log_level\n");
        for o in rates.observations() {
            let _ = writeln!(lv, "{},{:.5}", o.date, o.level.ln());
        }
        tables.push(Table {
            name: format!("plot_{}_levels.csv", slug(label)),
            content: lv,
        });
        if let Ok(r) = series::log_returns(rates) {
            let mut rv = String::from("date,return\n");
            for (d, v) in r.dates().iter().zip(r.values()) {
                let _ = writeln!(rv, "{d},{v:.3}");
            }
            tables.push(Table {
                name: format!("plot_{}_returns.csv", slug(label)),
                content: rv,
            });
        }
    }
    for s in &bundle.series {
        let Some((_, rates)) = loaded.iter().find(|(l, _)| *l == s.label) else { continue };
        let Ok(r) = series::log_returns(rates) else { continue };
        for p in &s.periods {
            let Some(g) = p.garch.ok() else { continue };
            let dates: Vec<NaiveDate> = r
                .dates()
                .iter()
                .copied()
                .filter(|d| *d >= p.start && *d <= p.end)
                .collect();
            let mut sv = String::from("date,sigma\n");
            for (d, v) in dates.iter().zip(&g.fit.sigma_path) {
                let _ = writeln!(sv, "{d},{v:.3}");
            }
            tables.push(Table {
                name: format!("plot_{}_{}_sigma.csv", slug(&s.label), p.period),
                content: sv,
            });
        }
    }
    tables
}

/// Renders the CSV tables that have content. `with_plots` adds plot data
/// files, which need the raw series again.
pub fn to_csv_tables(bundle: &ReportBundle, with_plots: bool) -> Result<Vec<Table>> {
    let mut tables: Vec<Table> = [
        table_unit_roots(bundle),
        table_summary(bundle),
        table_tails(bundle),
        table_extremes(bundle),
        table_stability(bundle),
        table_quantiles(bundle),
        table_probabilities(bundle),
        table_garch(bundle),
    ]
    .into_iter()
    .flatten()
    .collect();
    if with_plots {
        let delimiter = bundle.metadata.config.delimiter;
        let loaded = bundle
            .metadata
            .config
            .inputs
            .iter()
            .map(|i| load_input(i, delimiter).map(|l| (l.spec.label, l.rates)))
            .collect::<Result<Vec<_>>>()?;
        tables.extend(plot_tables(bundle, &loaded));
    }
    Ok(tables)
}

/// Writes the report. With `out` every table becomes a file in that directory
/// (JSON goes to `report.json`); without it everything goes to the returned
/// string for stdout.
pub fn emit(bundle: &ReportBundle, format: OutputFormat, out: Option<&Path>, with_plots: bool) -> Result<String> {
    match (format, out) {
        (OutputFormat::Json, None) => Ok(to_json(bundle)),
        (OutputFormat::Json, Some(dir)) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.json"), to_json(bundle))?;
            Ok(String::new())
        }
        (OutputFormat::Csv, None) => {
            let mut s = String::new();
            for t in to_csv_tables(bundle, false)? {
                let _ = writeln!(s, "# {}", t.name);
                s.push_str(&t.content);
                s.push('\n');
            }
            Ok(s)
        }
        (OutputFormat::Csv, Some(dir)) => {
            fs::create_dir_all(dir)?;
            for t in to_csv_tables(bundle, with_plots)? {
                fs::write(dir.join(&t.name), &t.content)?;
            }
            Ok(String::new())
        }
    }
}

pub const SYNTHETIC_START: NaiveDate = match NaiveDate::from_ymd_opt(1990, 1, 1) {
    Some(d) => d,
    None => panic!("valid start date"),
};

/// Draws `n` percent returns from `spec` and integrates them into a level
/// series starting at 1.0 on consecutive days, in the loader's CSV format.
pub fn synthetic(spec: &DistSpec, n: usize, seed: u64) -> Result<String> {
    if n == 0 {
        return Err(crate::error::invalid("n", "must be at least 1"));
    }
    let draws = evd::sample(spec, n, seed)?;
    let mut out = String::new();
    let _ = writeln!(out, "# synthetic {spec} n={n} seed={seed}");
    out.push_str("date,level\n");
    let mut log_level = 0.0_f64;
    let mut date = SYNTHETIC_START;
    let _ = writeln!(out, "{date},{}", 1.0_f64);
    for x in draws {
        log_level += x / 100.0;
        let level = log_level.exp();
        if !(level.is_finite() && level > 0.0) {
            return Err(crate::error::invalid(
                "spec",
                "integrated level left the floating-point range; use a smaller scale",
            ));
        }
        date = date
            .checked_add_days(Days::new(1))
            .ok_or_else(|| crate::error::invalid("n", "date range overflow"))?;
        let _ = writeln!(out, "{date},{level}");
    }
    Ok(out)
}
