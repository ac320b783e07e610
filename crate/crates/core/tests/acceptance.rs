//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Each criterion returns a short detail string on success.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use tailrisk::evd::{self, DistSpec};
use tailrisk::garch::{garch_fit, garch_simulate, ljung_box};
use tailrisk::montecarlo::{self, median, stream, Execution};
use tailrisk::risk::{self, excess_probability, quantile};
use tailrisk::stationarity::{self, Deterministic, UnitRootTest};
use tailrisk::{
    estimate_tail, estimate_tail_traced, hill_gamma, select_threshold, tail_stability, ReturnSeries, Side,
    TailEstimate, TailSample,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn est(side: Side, alpha: f64, se: f64) -> TailEstimate {
    TailEstimate::from_alpha_se(side, alpha, se, 1000).expect("valid reported estimate")
}

fn stability_from_reported_estimates() -> Outcome {
    let dm_lower = est(Side::Lower, 3.51, 0.32);
    let dm_upper = est(Side::Upper, 3.40, 0.31);
    let z1 = tail_stability(&dm_upper, &dm_lower).statistic;
    let euro = est(Side::Both, 3.71, 0.42);
    let dm = est(Side::Both, 3.82, 0.35);
    let z2 = tail_stability(&euro, &dm).statistic;
    check(
        (z1 + 0.25).abs() <= 0.02 && (z2 + 0.20).abs() <= 0.01,
        format!("DM symmetry z = {z1:.3} (reference -0.24), Euro vs DM z = {z2:.3} (reference -0.20)"),
    )
}

fn quantile_ratio_law() -> Outcome {
    let ratio = |alpha: f64| {
        let mut t = TailEstimate::from_alpha_se(Side::Both, alpha, alpha / 10.0, 1000).unwrap();
        t.threshold_value = 1.0;
        quantile(&t, 0.01).unwrap() / quantile(&t, 0.05).unwrap()
    };
    let euro = ratio(3.71);
    let yen = ratio(2.82);
    let euro_pub = 1.78 / 1.15;
    let yen_pub = 1.88 / 1.06;
    check(
        (euro - 1.543).abs() <= 0.001
            && (euro / euro_pub - 1.0).abs() < 0.005
            && (yen - 1.769).abs() <= 0.001
            && (yen / yen_pub - 1.0).abs() < 0.005,
        format!("Euro {euro:.4} vs {euro_pub:.4}, Yen {yen:.4} vs {yen_pub:.4}"),
    )
}

fn probability_ratio_law() -> Outcome {
    let mut t = TailEstimate::from_alpha_se(Side::Both, 3.71, 0.42, 1000).unwrap();
    t.threshold_value = 0.5;
    let ratio = excess_probability(&t, 1.0).unwrap() / excess_probability(&t, 5.0).unwrap();
    // Interval implied by the rounded pair (8.43, 0.02).
    let (lo, hi) = (8.425 / 0.025, 8.435 / 0.015);
    check(
        ratio > lo && ratio < hi && (ratio - 392.0).abs() < 1.0,
        format!("P(>1)/P(>5) = {ratio:.1}, admissible [{lo:.0}, {hi:.0}]"),
    )
}

fn hill_correctness() -> Outcome {
    let t = TailSample::from_magnitudes(Side::Upper, vec![16.0, 8.0, 4.0, 2.0, 1.0], 5).unwrap();
    let g = hill_gamma(&t, 2).unwrap().gamma;
    let n = 100_000usize;
    let grid: Vec<f64> = (1..=n).map(|i| (n as f64 / i as f64).powf(1.0 / 3.0)).collect();
    let t = TailSample::from_magnitudes(Side::Upper, grid, n).unwrap();
    let m = (n as f64).powf(2.0 / 3.0).floor() as usize;
    let a = hill_gamma(&t, m).unwrap().alpha;
    check(
        (g - 1.03972).abs() < 1e-5 && (a - 3.0).abs() < 0.05,
        format!("hand gamma = {g:.6}, Pareto grid alpha = {a:.4} at m = {m}"),
    )
}

fn threshold_sanity() -> Outcome {
    let t = TailSample::from_magnitudes(Side::Both, (1..=776).map(|i| 776.0 / i as f64).collect(), 776).unwrap();
    let s = select_threshold(&t).unwrap();
    let spec = DistSpec::StudentT { dof: 4.0, scale: 1.0 };
    let hits = montecarlo::rate(200, Execution::default(), |i| {
        let x = evd::sample_with(&spec, 776, &mut stream(5, i as u64));
        let r = ReturnSeries::from_values("t4", x);
        estimate_tail_traced(&r, Side::Both)
            .map(|(_, sel)| (40..=120).contains(&sel.m_star))
            .unwrap_or(false)
    });
    check(
        (s.m1, s.m2) == (54, 399) && hits >= 0.80,
        format!("(m1, m2) = ({}, {}), m* in [40, 120] for {:.1}% of seeds", s.m1, s.m2, 100.0 * hits),
    )
}

fn estimator_recovery() -> Outcome {
    let exec = Execution::default();
    let median_alpha = |spec: DistSpec, side: Side, seed: u64| {
        let a = montecarlo::map_reps(200, exec, |i| {
            let x = evd::sample_with(&spec, 2500, &mut stream(seed, i as u64));
            estimate_tail(&ReturnSeries::from_values("sim", x), side)
                .map(|e| e.alpha)
                .unwrap_or(f64::NAN)
        });
        median(&a)
    };
    let pareto = median_alpha(DistSpec::Pareto { alpha: 3.0, scale: 1.0 }, Side::Upper, 61);
    let student = median_alpha(DistSpec::StudentT { dof: 3.0, scale: 1.0 }, Side::Both, 62);

    let (n, m) = (2000usize, 100usize);
    let spec = DistSpec::Pareto { alpha: 3.0, scale: 1.0 };
    let z = montecarlo::map_reps(1000, exec, |i| {
        let x = evd::sample_with(&spec, n, &mut stream(63, i as u64));
        let t = TailSample::from_returns(&x, Side::Upper);
        let a = hill_gamma(&t, m).unwrap().alpha;
        (a - 3.0) * (m as f64).sqrt() / 3.0
    });
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (z.len() - 1) as f64).sqrt();
    check(
        (pareto - 3.0).abs() <= 0.3
            && (student - 3.0).abs() <= 0.5
            && (-0.15..=0.15).contains(&mean)
            && (0.85..=1.15).contains(&sd),
        format!(
            "median alpha Pareto(3) = {pareto:.3}, t(3) = {student:.3}; standardized Hill mean {mean:.3}, sd {sd:.3}"
        ),
    )
}

fn inverse_identity() -> Outcome {
    let mut rng = montecarlo::rng(71);
    let mut worst = 0.0_f64;
    let mut monotone = true;
    for _ in 0..1000 {
        let alpha = rng.random_range(0.8..6.0);
        let n = rng.random_range(100..20_000usize);
        let m = rng.random_range(2..n / 2);
        let mut t = TailEstimate::from_alpha_se(Side::Both, alpha, alpha / (m as f64).sqrt(), n).unwrap();
        t.m = m;
        t.threshold_value = rng.random_range(0.1..5.0);
        let p = rng.random_range(1e-6..(m as f64 / n as f64));
        let x = quantile(&t, p).unwrap();
        let back = excess_probability(&t, x).unwrap();
        worst = worst.max(((back - p) / p).abs());

        let qg = risk::quantile_grid(&t, &risk::default_probabilities(n)).unwrap();
        monotone &= qg.entries.windows(2).all(|w| w[1].return_level >= w[0].return_level);
        let pg = risk::probability_grid(&t, &risk::default_levels()).unwrap();
        monotone &= pg.entries.windows(2).all(|w| w[1].exceed_prob >= w[0].exceed_prob);
    }
    check(
        worst < 1e-12 && monotone,
        format!("max relative inverse error {worst:.2e}, grids monotone: {monotone}"),
    )
}

fn garch_recovery() -> Outcome {
    let truth = [0.05, 0.10, 0.85, 6.0];
    let exec = Execution::default();
    let covered = montecarlo::map_reps(50, exec, |i| {
        let x = garch_simulate(truth[0], truth[1], truth[2], truth[3], 5000, 800 + i as u64).unwrap();
        let Ok(f) = garch_fit(&x) else { return [false; 4] };
        let se = f.robust_se;
        let within = |v: f64, s: Option<f64>, t: f64| s.is_some_and(|s| (v - t).abs() <= 3.0 * s);
        [
            within(f.omega, se.omega, truth[0]),
            within(f.a, se.a, truth[1]),
            within(f.b, se.b, truth[2]),
            within(f.dof, se.dof, truth[3]),
        ]
    });
    let rates: Vec<f64> = (0..4)
        .map(|j| covered.iter().filter(|c| c[j]).count() as f64 / covered.len() as f64)
        .collect();
    let lb_size = montecarlo::rate(500, exec, |i| {
        let mut rng = stream(900, i as u64);
        let x: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        ljung_box(&x, 10).unwrap().reject_5pct
    });
    check(
        rates.iter().all(|r| *r >= 0.90) && (0.02..=0.09).contains(&lb_size),
        format!(
            "coverage omega {:.0}%, a {:.0}%, b {:.0}%, dof {:.0}%; Ljung-Box size {:.1}%",
            100.0 * rates[0],
            100.0 * rates[1],
            100.0 * rates[2],
            100.0 * rates[3],
            100.0 * lb_size
        ),
    )
}

fn ar_path(phi: f64, n: usize, seed: u64, i: usize) -> Vec<f64> {
    let mut rng = stream(seed, i as u64);
    let mut x = Vec::with_capacity(n);
    let mut prev = 0.0;
    for _ in 0..n {
        let e: f64 = rng.sample(StandardNormal);
        prev = phi * prev + e;
        x.push(prev);
    }
    x
}

fn unit_root_size_power() -> Outcome {
    let exec = Execution::default();
    let tests = |x: &[f64]| {
        let lag = stationarity::default_max_lag(x.len());
        [
            stationarity::adf_test(x, lag, Deterministic::Constant).unwrap().reject_5pct,
            stationarity::pp_test(x, UnitRootTest::PpZt).unwrap().reject_5pct,
            stationarity::pp_test(x, UnitRootTest::PpZrho).unwrap().reject_5pct,
        ]
    };
    let rate_of = |rows: &[[bool; 3]], j: usize| rows.iter().filter(|r| r[j]).count() as f64 / rows.len() as f64;
    let walks = montecarlo::map_reps(500, exec, |i| tests(&ar_path(1.0, 500, 1000, i)));
    let stationary = montecarlo::map_reps(500, exec, |i| tests(&ar_path(0.5, 2000, 1001, i)));
    let size: Vec<f64> = (0..3).map(|j| rate_of(&walks, j)).collect();
    let power: Vec<f64> = (0..3).map(|j| rate_of(&stationary, j)).collect();
    check(
        size.iter().all(|s| (0.02..=0.09).contains(s)) && power.iter().all(|p| *p >= 0.99),
        format!(
            "size ADF {:.1}%, PP-Zt {:.1}%, PP-Zrho {:.1}%; power {:.1}%, {:.1}%, {:.1}%",
            100.0 * size[0],
            100.0 * size[1],
            100.0 * size[2],
            100.0 * power[0],
            100.0 * power[1],
            100.0 * power[2]
        ),
    )
}

fn evd_module() -> Outcome {
    let spec = DistSpec::Frechet { alpha: 1.0, scale: 1.0 };
    let meta = 100;
    let passes = (0..meta)
        .filter(|&s| {
            evd::max_stability_check(&spec, 100, 200, 1100 + s as u64, Execution::default())
                .unwrap()
                .pass
        })
        .count();
    let rate = passes as f64 / meta as f64;
    let g = evd::gnedenko_ratio(&DistSpec::Pareto { alpha: 3.0, scale: 1.0 }, 10.0, 2.0).unwrap();
    check(
        rate >= 0.90 && g == 0.125,
        format!("max-stability passes in {:.0}% of meta-seeds, Gnedenko ratio {g}", 100.0 * rate),
    )
}

fn end_to_end_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_tailrisk");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth = Command::new(bin)
        .args(["synthetic", "student_t", "dof=4", "scale=0.6", "n=1500", "seed=7"])
        .output()
        .map_err(|e| e.to_string())?;
    if !synth.status.success() {
        return Err(String::from_utf8_lossy(&synth.stderr).into_owned());
    }
    let input = dir.path().join("sim.csv");
    std::fs::write(&input, &synth.stdout).map_err(|e| e.to_string())?;
    let run = |format: &str, out: Option<&std::path::Path>| {
        let mut cmd = Command::new(bin);
        cmd.arg("report")
            .arg(format!("SIM={}", input.display()))
            .args(["--split", "1992-01-01", "--format", format]);
        if let Some(o) = out {
            cmd.arg("--out").arg(o);
        }
        cmd.output().expect("binary runs")
    };
    let a = run("json", None);
    let b = run("json", None);
    let (da, db) = (dir.path().join("a"), dir.path().join("b"));
    run("csv", Some(&da));
    run("csv", Some(&db));
    let mut names: Vec<_> = std::fs::read_dir(&da)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let csv_same = !names.is_empty()
        && names
            .iter()
            .all(|n| std::fs::read(da.join(n)).ok() == std::fs::read(db.join(n)).ok());
    check(
        !a.stdout.is_empty() && a.stdout == b.stdout && csv_same,
        format!(
            "JSON report {} bytes identical: {}; {} CSV files identical: {csv_same}",
            a.stdout.len(),
            a.stdout == b.stdout,
            names.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("stability statistic from reported estimates", stability_from_reported_estimates),
        ("quantile ratio law", quantile_ratio_law),
        ("exceedance ratio law", probability_ratio_law),
        ("Hill correctness", hill_correctness),
        ("adaptive threshold sanity", threshold_sanity),
        ("estimator recovery", estimator_recovery),
        ("quantile/probability inverse identity", inverse_identity),
        ("GARCH recovery and Ljung-Box size", garch_recovery),
        ("unit-root size and power", unit_root_size_power),
        ("EVD max-stability and Gnedenko ratio", evd_module),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} ({secs:.1}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
