//! Rate ingestion, percent log returns, subperiod splits and descriptive
//! statistics.

use std::io::BufRead;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateObservation {
    pub date: NaiveDate,
    pub level: f64,
}

/// Dated sequence of strictly positive rate levels, strictly increasing in date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    label: String,
    observations: Vec<RateObservation>,
}

impl RateSeries {
    /// Builds a series, sorting by date. Rejects non-positive levels and duplicate dates.
    pub fn new(label: impl Into<String>, mut observations: Vec<RateObservation>) -> Result<Self> {
        for (i, o) in observations.iter().enumerate() {
            if !(o.level > 0.0 && o.level.is_finite()) {
                return Err(Error::NonPositiveLevel {
                    record: i + 1,
                    level: o.level,
                });
            }
        }
        let mut indexed: Vec<(usize, RateObservation)> =
            observations.drain(..).enumerate().collect();
        indexed.sort_by_key(|(_, o)| o.date);
        for w in indexed.windows(2) {
            if w[0].1.date == w[1].1.date {
                return Err(Error::DuplicateDate {
                    record: w[0].0.max(w[1].0) + 1,
                    date: w[1].1.date.to_string(),
                });
            }
        }
        Ok(Self {
            label: label.into(),
            observations: indexed.into_iter().map(|(_, o)| o).collect(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observations(&self) -> &[RateObservation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn levels(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.level).collect()
    }

    pub fn log_levels(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.level.ln()).collect()
    }
}

/// Percent log first differences of a [`RateSeries`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    label: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(invalid("dates", "dates and values differ in length"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("dates", "dates must be strictly increasing"));
        }
        Ok(Self {
            label: label.into(),
            dates,
            values,
        })
    }

    /// Wraps bare values with consecutive calendar dates starting 2000-01-01.
    pub fn from_values(label: impl Into<String>, values: Vec<f64>) -> Self {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..values.len())
            .map(|i| start + Days::new(i as u64))
            .collect();
        Self {
            label: label.into(),
            dates,
            values,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
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

    /// Same dates, every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            label: self.label.clone(),
            dates: self.dates.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Levels implied by compounding the returns from `initial`.
    pub fn reconstruct_levels(&self, initial: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len() + 1);
        let mut log_level = initial.ln();
        out.push(initial);
        for v in &self.values {
            log_level += v / 100.0;
            out.push(log_level.exp());
        }
        out
    }

    /// Concatenates two series that are adjacent in time.
    pub fn concat(&self, other: &ReturnSeries) -> Result<Self> {
        let mut dates = self.dates.clone();
        dates.extend_from_slice(&other.dates);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Self::new(self.label.clone(), dates, values)
    }
}

/// Field delimiter of the rate CSV input.
#[derive(Debug, Clone, Copy)]
pub struct CsvFormat {
    pub delimiter: char,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self { delimiter: ',' }
    }
}

/// Reads `date,level` records. Lines starting with `#` and blank lines are
/// skipped; a header is accepted as the first record.
pub fn load_series<R: BufRead>(
    source: R,
    format: CsvFormat,
    label: impl Into<String>,
) -> Result<RateSeries> {
    let delimiter = u8::try_from(format.delimiter)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| invalid("delimiter", format!("`{}` is not an ASCII character", format.delimiter)))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let mut observations = Vec::new();
    let mut record = 0usize;
    let mut seen_header = false;
    for row in reader.records() {
        let row = row.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
            _ => Error::Parse {
                record: record + 1,
                reason: e.to_string(),
            },
        })?;
        if row.iter().all(str::is_empty) {
            continue;
        }
        record += 1;
        let (date_field, level_field) = match (row.get(0), row.get(1), row.len()) {
            (Some(d), Some(l), 2) => (d, l),
            _ => {
                return Err(Error::Parse {
                    record,
                    reason: format!("expected two fields, got {}", row.len()),
                })
            }
        };
        let date = match NaiveDate::parse_from_str(date_field, "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) if record == 1 && !seen_header && level_field.parse::<f64>().is_err() => {
                seen_header = true;
                record = 0;
                continue;
            }
            Err(e) => {
                return Err(Error::Parse {
                    record,
                    reason: format!("unparseable date `{date_field}`: {e}"),
                })
            }
        };
        let level: f64 = level_field.parse().map_err(|_| Error::Parse {
            record,
            reason: format!("unparseable level `{level_field}`"),
        })?;
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::NonPositiveLevel { record, level });
        }
        observations.push(RateObservation { date, level });
    }
    if observations.len() < 3 {
        return Err(Error::InsufficientData {
            what: "rate series",
            needed: 3,
            got: observations.len(),
        });
    }
    RateSeries::new(label, observations)
}

/// `100 * (ln s_t - ln s_{t-1})`, dated at `t`.
pub fn log_returns(rates: &RateSeries) -> Result<ReturnSeries> {
    let obs = rates.observations();
    if obs.len() < 2 {
        return Err(Error::InsufficientData {
            what: "log returns",
            needed: 2,
            got: obs.len(),
        });
    }
    let dates = obs[1..].iter().map(|o| o.date).collect();
    let values = obs
        .windows(2)
        .map(|w| 100.0 * (w[1].level.ln() - w[0].level.ln()))
        .collect();
    Ok(ReturnSeries {
        label: rates.label().to_string(),
        dates,
        values,
    })
}

/// Splits into (strictly before `boundary`, on or after `boundary`).
/// Both parts must be non-empty.
pub fn split_period(r: &ReturnSeries, boundary: NaiveDate) -> Result<(ReturnSeries, ReturnSeries)> {
    let cut = r.dates.partition_point(|d| *d < boundary);
    if cut == 0 {
        return Err(Error::EmptySplit {
            boundary: boundary.to_string(),
            side: "first",
        });
    }
    if cut == r.len() {
        return Err(Error::EmptySplit {
            boundary: boundary.to_string(),
            side: "second",
        });
    }
    let part = |range: std::ops::Range<usize>| ReturnSeries {
        label: r.label.clone(),
        dates: r.dates[range.clone()].to_vec(),
        values: r.values[range].to_vec(),
    };
    Ok((part(0..cut), part(cut..r.len())))
}

pub const SUMMARY_KS_METHOD: &str =
    "KS on returns standardized by sample mean/sd; Lilliefors 5% critical value 0.895/(sqrt(n)-0.01+0.85/sqrt(n))";

/// Descriptive statistics of a return series. Moment-based fields are `None`
/// when the series is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub standard_deviation: f64,
    pub range: f64,
    pub interquartile_range: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub skew_z: Option<f64>,
    pub kurt_z: Option<f64>,
    pub skew_significant_5pct: Option<bool>,
    pub kurt_significant_5pct: Option<bool>,
    pub ks_statistic: Option<f64>,
    pub ks_critical_5pct: f64,
    pub ks_reject_5pct: Option<bool>,
}

const Z_5PCT_TWO_SIDED: f64 = 1.959_963_984_540_054;

pub fn summary_stats(r: &ReturnSeries) -> Result<SummaryStats> {
    let x = r.values();
    let n = x.len();
    if n < 8 {
        return Err(Error::InsufficientData {
            what: "summary statistics",
            needed: 8,
            got: n,
        });
    }
    let mean = stats::mean(x);
    let m2 = stats::central_moment(x, 2);
    let sd = m2.sqrt();
    let mut sorted = x.to_vec();
    stats::sort_f64(&mut sorted);
    let range = sorted[n - 1] - sorted[0];
    let iqr = stats::quantile_sorted(&sorted, 0.75) - stats::quantile_sorted(&sorted, 0.25);
    let nf = n as f64;
    let ks_critical = stats::lilliefors_critical_5pct(n);

    // Relative floor so round-off on a constant series does not pass as dispersion.
    let scale = sorted[0].abs().max(sorted[n - 1].abs()).max(f64::MIN_POSITIVE);
    if sd <= 1e-12 * scale {
        return Ok(SummaryStats {
            n,
            mean,
            standard_deviation: 0.0,
            range,
            interquartile_range: iqr,
            skewness: None,
            excess_kurtosis: None,
            skew_z: None,
            kurt_z: None,
            skew_significant_5pct: None,
            kurt_significant_5pct: None,
            ks_statistic: None,
            ks_critical_5pct: ks_critical,
            ks_reject_5pct: None,
        });
    }
    let skew = stats::central_moment(x, 3) / m2.powf(1.5);
    let kurt = stats::central_moment(x, 4) / (m2 * m2) - 3.0;
    let skew_z = skew / (6.0 / nf).sqrt();
    let kurt_z = kurt / (24.0 / nf).sqrt();
    let standardized: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();
    let ks = stats::ks_statistic(&standardized, stats::std_normal_cdf);
    Ok(SummaryStats {
        n,
        mean,
        standard_deviation: sd,
        range,
        interquartile_range: iqr,
        skewness: Some(skew),
        excess_kurtosis: Some(kurt),
        skew_z: Some(skew_z),
        kurt_z: Some(kurt_z),
        skew_significant_5pct: Some(skew_z.abs() > Z_5PCT_TWO_SIDED),
        kurt_significant_5pct: Some(kurt_z.abs() > Z_5PCT_TWO_SIDED),
        ks_statistic: Some(ks),
        ks_critical_5pct: ks_critical,
        ks_reject_5pct: Some(ks > ks_critical),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{rate, stream, Execution};
    use rand_distr::{Distribution, StandardNormal};

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn series(levels: &[f64]) -> RateSeries {
        let obs = levels
            .iter()
            .enumerate()
            .map(|(i, &level)| RateObservation {
                date: d("1999-01-01") + Days::new(i as u64),
                level,
            })
            .collect();
        RateSeries::new("t", obs).unwrap()
    }

    #[test]
    fn loads_three_records() {
        let src = "1999-01-04,1.1789\n1999-01-05,1.1790\n1999-01-06,1.1767\n";
        let s = load_series(src.as_bytes(), CsvFormat::default(), "EUR").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.observations()[2].level, 1.1767);
    }

    #[test]
    fn header_and_comments_are_tolerated() {
        let src = "# source: test\ndate,level\n1999-01-04,1.1\n\n1999-01-05,1.2\n# mid\n1999-01-06,1.3\n";
        let s = load_series(src.as_bytes(), CsvFormat::default(), "x").unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn zero_level_names_the_record() {
        let src = "1999-01-04,1.1\n1999-01-05,0.0\n1999-01-06,1.3\n";
        let err = load_series(src.as_bytes(), CsvFormat::default(), "x").unwrap_err();
        assert_eq!(err, Error::NonPositiveLevel { record: 2, level: 0.0 });
        assert!(err.to_string().contains("record 2"));
    }

    #[test]
    fn bad_date_and_duplicates_rejected() {
        let src = "1999-01-04,1.1\n1999-13-05,1.2\n1999-01-06,1.3\n";
        assert!(matches!(
            load_series(src.as_bytes(), CsvFormat::default(), "x"),
            Err(Error::Parse { record: 2, .. })
        ));
        let src = "1999-01-04,1.1\n1999-01-04,1.2\n1999-01-06,1.3\n";
        assert!(matches!(
            load_series(src.as_bytes(), CsvFormat::default(), "x"),
            Err(Error::DuplicateDate { .. })
        ));
        let src = "1999-01-04,1.1\n1999-01-05,1.2\n";
        assert!(matches!(
            load_series(src.as_bytes(), CsvFormat::default(), "x"),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn descending_input_is_sorted() {
        let asc = "1999-01-04,1.1789\n1999-01-05,1.1790\n1999-01-06,1.1767\n";
        let desc = "1999-01-06,1.1767\n1999-01-05,1.1790\n1999-01-04,1.1789\n";
        let a = load_series(asc.as_bytes(), CsvFormat::default(), "x").unwrap();
        let b = load_series(desc.as_bytes(), CsvFormat::default(), "x").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn semicolon_delimiter() {
        let src = "1999-01-04;1.1\n1999-01-05;1.2\n1999-01-06;1.3\n";
        let s = load_series(src.as_bytes(), CsvFormat { delimiter: ';' }, "x").unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn log_return_examples() {
        assert_eq!(log_returns(&series(&[1.0, 1.0, 1.0])).unwrap().values()[0], 0.0);
        let r = log_returns(&series(&[1.0, 0.01f64.exp(), 1.0])).unwrap();
        assert!((r.values()[0] - 1.0).abs() < 1e-12);
        let r = log_returns(&series(&[2.0, 1.0, 1.0])).unwrap();
        assert!((r.values()[0] - (-69.314_718_055_994_53)).abs() < 1e-9);
        assert_eq!(r.len(), 2);
        assert_eq!(r.dates()[0], d("1999-01-02"));
    }

    #[test]
    fn log_returns_need_two_levels() {
        let s = RateSeries::new(
            "x",
            vec![RateObservation {
                date: d("1999-01-01"),
                level: 1.0,
            }],
        )
        .unwrap();
        assert!(log_returns(&s).is_err());
    }

    #[test]
    fn split_partitions_and_rejects_empty_sides() {
        let r = log_returns(&series(&[1.0, 1.1, 1.2, 1.3, 1.4, 1.5])).unwrap();
        let first = r.dates()[0];
        let last = *r.dates().last().unwrap();
        assert!(matches!(split_period(&r, first), Err(Error::EmptySplit { side: "first", .. })));
        assert!(matches!(
            split_period(&r, last + Days::new(1)),
            Err(Error::EmptySplit { side: "second", .. })
        ));
        let (a, b) = split_period(&r, d("1999-01-04")).unwrap();
        assert_eq!(a.len() + b.len(), r.len());
        assert!(a.dates().iter().all(|x| *x < d("1999-01-04")));
        assert_eq!(b.dates()[0], d("1999-01-04"));
        assert_eq!(a.concat(&b).unwrap(), r);
    }

    #[test]
    fn symmetric_sequence_has_zero_skew() {
        let x: Vec<f64> = (0..300).map(|i| (i % 3) as f64 - 1.0).collect();
        let s = summary_stats(&ReturnSeries::from_values("s", x)).unwrap();
        assert!(s.mean.abs() < 1e-12);
        assert!(s.skewness.unwrap().abs() < 1e-12);
        assert!(s.range >= s.interquartile_range && s.interquartile_range >= 0.0);
    }

    #[test]
    fn constant_series_flags_moments_undefined() {
        let s = summary_stats(&ReturnSeries::from_values("c", vec![0.5; 20])).unwrap();
        assert_eq!(s.standard_deviation, 0.0);
        assert!(s.skewness.is_none() && s.excess_kurtosis.is_none());
        assert!(s.ks_reject_5pct.is_none());
    }

    #[test]
    fn summary_needs_eight_points() {
        assert!(summary_stats(&ReturnSeries::from_values("c", vec![1.0; 7])).is_err());
    }

    #[test]
    fn normal_draws_look_normal() {
        let mut rng = stream(2024, 0);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = summary_stats(&ReturnSeries::from_values("n", x)).unwrap();
        assert!(s.excess_kurtosis.unwrap().abs() < 0.15);
        assert_eq!(s.ks_reject_5pct, Some(false));
    }

    #[test]
    fn ks_size_on_normal_samples() {
        let freq = rate(500, Execution::default(), |i| {
            let mut rng = stream(99, i as u64);
            let x: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
            summary_stats(&ReturnSeries::from_values("n", x))
                .unwrap()
                .ks_reject_5pct
                .unwrap()
        });
        assert!((0.02..=0.09).contains(&freq), "KS size {freq}");
    }

    #[test]
    fn reflection_negates_skew_only() {
        let mut rng = stream(5, 0);
        let x: Vec<f64> = (0..400)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * z - z
            })
            .collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = summary_stats(&ReturnSeries::from_values("a", x)).unwrap();
        let b = summary_stats(&ReturnSeries::from_values("b", neg)).unwrap();
        assert!((a.standard_deviation - b.standard_deviation).abs() < 1e-12);
        assert!((a.range - b.range).abs() < 1e-12);
        assert!((a.interquartile_range - b.interquartile_range).abs() < 1e-12);
        assert!((a.skewness.unwrap() + b.skewness.unwrap()).abs() < 1e-12);
    }
}
