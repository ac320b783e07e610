//! Tail-risk estimation for univariate return series.
//!
//! The crate turns a series of positive rate levels into percent log returns
//! and measures its extreme behaviour: Hill tail indices with an adaptive
//! threshold, tail stability and moment tests, extreme quantiles and
//! exceedance probabilities. Unit-root tests and a GARCH(1,1)-t volatility
//! fit cover the supporting diagnostics, and [`evd`] provides the limit laws
//! and seeded samplers used to validate everything on synthetic data.
//!
//! Monte-Carlo work runs on rayon when the `parallel` feature (default) is
//! enabled; see [`montecarlo::Execution`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evd;
pub mod garch;
pub mod montecarlo;
pub mod report;
pub mod risk;
pub mod series;
pub mod stationarity;
pub mod stats;
pub mod tail;

pub use error::{Error, Result};
pub use series::{log_returns, load_series, split_period, summary_stats, RateSeries, ReturnSeries};
pub use tail::{
    estimate_tail, estimate_tail_traced, hill_gamma, moment_test, select_threshold, stable_family_test, tail_sample,
    tail_stability, Side, TailEstimate, TailSample, ThresholdSelection,
};
