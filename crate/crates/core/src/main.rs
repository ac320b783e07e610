use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tailrisk::evd::DistSpec;
use tailrisk::report::{self, ConfigBuilder, InputSpec, Section};
use tailrisk::Error;

#[derive(Parser)]
#[command(name = "tailrisk", version, about = "Tail-risk analysis of exchange-rate series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics and normality tests on returns.
    Summary(Common),
    /// ADF and Phillips-Perron tests on log levels and returns.
    Unitroot(Common),
    /// Hill tail indices, stability and moment tests, extremes.
    Tails(Common),
    /// Return levels for a grid of tail probabilities.
    Quantiles(Common),
    /// Exceedance probabilities for a grid of return levels.
    Probabilities(Common),
    /// GARCH(1,1) with Student-t innovations.
    Garch(Common),
    /// Every section, plus plot data files.
    Report(Common),
    /// Synthetic level series, e.g. `synthetic pareto alpha=3 n=2500 seed=7`.
    Synthetic {
        family: String,
        /// `key=value` parameters; `n` and `seed` are taken from here too.
        params: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Input files as `LABEL=PATH` or a bare path.
    inputs: Vec<String>,
    #[arg(long = "input", value_name = "LABEL=PATH")]
    input_flags: Vec<String>,
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Subperiod boundary (YYYY-MM-DD); the boundary date opens the second period.
    #[arg(long)]
    split: Option<String>,
    /// Comma list of lower, upper, both.
    #[arg(long)]
    sides: Option<String>,
    /// Comma list of tail probabilities.
    #[arg(long)]
    probs: Option<String>,
    /// Comma list of return levels in percent.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    format: Option<String>,
    /// Output directory; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the threshold selection details.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Ljung-Box lag count for GARCH diagnostics.
    #[arg(long)]
    lags: Option<usize>,
    /// Number of extremes to list on each side.
    #[arg(long)]
    extremes: Option<usize>,
    /// Cap on ADF augmentation lags.
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long)]
    delimiter: Option<char>,
}

impl Common {
    fn builder(&self) -> Result<ConfigBuilder, Error> {
        let base = match &self.config {
            Some(p) => ConfigBuilder::from_file(p)?,
            None => ConfigBuilder::default(),
        };
        let mut flags = ConfigBuilder::default();
        for i in self.input_flags.iter().chain(&self.inputs) {
            flags.inputs.push(i.parse::<InputSpec>()?);
        }
        let pairs = [
            ("split", &self.split),
            ("sides", &self.sides),
            ("probs", &self.probs),
            ("levels", &self.levels),
            ("format", &self.format),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                flags.set(k, v)?;
            }
        }
        if self.trace {
            flags.trace = Some(true);
        }
        flags.seed = self.seed;
        flags.ljung_box_lags = self.lags;
        flags.extremes_k = self.extremes;
        flags.adf_max_lag = self.max_lag;
        flags.delimiter = self.delimiter;
        Ok(base.overlay(flags))
    }
}

enum Failure {
    Usage(Error),
    Degraded,
}

fn run_analysis(common: &Common, sections: &[Section], with_plots: bool) -> Result<(), Failure> {
    let sections: BTreeSet<Section> = sections.iter().copied().collect();
    let cfg = common
        .builder()
        .and_then(|b| b.build(sections))
        .map_err(Failure::Usage)?;
    let bundle = report::run_pipeline(&cfg).map_err(Failure::Usage)?;
    let text = report::emit(&bundle, cfg.format, common.out.as_deref(), with_plots).map_err(Failure::Usage)?;
    print!("{text}");
    for d in &bundle.metadata.degraded {
        eprintln!("degraded: {d}");
    }
    if bundle.has_degraded() {
        Err(Failure::Degraded)
    } else {
        Ok(())
    }
}

fn run_synthetic(family: &str, params: &[String]) -> Result<(), Failure> {
    let mut n = None;
    let mut seed = 0_u64;
    let mut spec_parts = vec![family.to_string()];
    for p in params {
        match p.split_once('=') {
            Some(("n", v)) => {
                n = Some(v.parse::<usize>().map_err(|_| Failure::Usage(Error::Config(format!("n: cannot parse `{v}`"))))?)
            }
            Some(("seed", v)) => {
                seed = v.parse().map_err(|_| Failure::Usage(Error::Config(format!("seed: cannot parse `{v}`"))))?
            }
            _ => spec_parts.push(p.clone()),
        }
    }
    let n = n.ok_or_else(|| Failure::Usage(Error::Config("synthetic requires n=<count>".into())))?;
    let spec: DistSpec = spec_parts.join(" ").parse().map_err(Failure::Usage)?;
    let text = report::synthetic(&spec, n, seed).map_err(Failure::Usage)?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Summary(c) => run_analysis(c, &[Section::Summary], false),
        Command::Unitroot(c) => run_analysis(c, &[Section::UnitRoot], false),
        Command::Tails(c) => run_analysis(c, &[Section::Tails], false),
        Command::Quantiles(c) => run_analysis(c, &[Section::Quantiles], false),
        Command::Probabilities(c) => run_analysis(c, &[Section::Probabilities], false),
        Command::Garch(c) => run_analysis(c, &[Section::Garch], false),
        Command::Report(c) => run_analysis(c, &Section::ALL, true),
        Command::Synthetic { family, params } => run_synthetic(family, params),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Degraded) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            eprintln!("run `tailrisk --help` for usage");
            ExitCode::from(2)
        }
    }
}

