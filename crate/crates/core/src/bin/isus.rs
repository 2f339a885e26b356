use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use unequal_support::config::{Config, CvChoice, ProblemSpec};
use unequal_support::densities::{draw, RandomStream};
use unequal_support::estimators::{estimate_all, ControlVariate};
use unequal_support::experiments::{
    coverage_study, render, sweep_bounds, sweep_illustrative, sweep_treatment_surrogate,
    BoundSweep, CvMode, Format, IllustrativeSweep, Tabular, TreatmentSweep, TreatmentTruth,
    SyntheticReturnSurface, DEFAULT_F_MAX_GRID, DEFAULT_TRIALS,
};
use unequal_support::moments::{moment_report, Estimator, MomentInputs, Regime};
use unequal_support::{Error, Result};

#[derive(Parser)]
#[command(name = "isus", version, about = "IS / US / WIS estimators and experiment sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML file with problem, run and grid sections; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one batch and print IS, US, WIS, k and ĉ = k/n.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        /// Illustrative problem; ignored when the config names a problem.
        #[arg(long, default_value_t = 1.0)]
        f_max: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// none | value:<real> | sampling-mean (treatment problems only)
        #[arg(long)]
        cv: Option<CvChoice>,
    },
    /// Variance curves over the illustrative family.
    SweepIllustrative {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        f_max: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
    },
    /// Synthetic insulin-dosing sweep over CR_min.
    SweepTreatment {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        cr_min: Option<Vec<f64>>,
        #[arg(long)]
        n: Option<usize>,
        /// none | sampling-mean
        #[arg(long)]
        cv: Option<CvChoice>,
    },
    /// Mean two-sided Hoeffding intervals of IS and US.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        f_max: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Total miss probability of each interval.
        #[arg(long)]
        delta: Option<f64>,
        /// Use `delta` on each side instead of splitting it.
        #[arg(long)]
        per_side: bool,
    },
    /// One-sided lower-bound coverage of IS and US.
    Coverage {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        f_max: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Closed-form means, variances and MSEs for one (n, c, v, θ).
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        v: f64,
        #[arg(long)]
        theta: f64,
        /// Adds the k = κ rows.
        #[arg(long)]
        kappa: Option<u64>,
        /// none | value:<real>
        #[arg(long)]
        cv: Option<CvChoice>,
    },
}

fn load(common: &Common) -> Result<Config> {
    match &common.config {
        Some(path) => Config::load(path),
        None => Ok(Config::default()),
    }
}

fn write_bytes(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn write_rows<R: Tabular>(common: &Common, rows: &[R]) -> Result<()> {
    write_bytes(&common.out, &render(rows, common.format)?)
}

#[derive(Serialize)]
struct EstimateRow {
    n: usize,
    k: usize,
    c: f64,
    c_hat: f64,
    t: f64,
    is: f64,
    us: f64,
    us_defined: bool,
    wis: f64,
    wis_defined: bool,
    seed: u64,
}

impl Tabular for EstimateRow {
    fn header(&self) -> Vec<&'static str> {
        vec!["n", "k", "c", "c_hat", "t", "is", "us", "us_defined", "wis", "wis_defined", "seed"]
    }

    fn record(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.16e}");
        vec![
            self.n.to_string(),
            self.k.to_string(),
            f(self.c),
            f(self.c_hat),
            f(self.t),
            f(self.is),
            f(self.us),
            self.us_defined.to_string(),
            f(self.wis),
            self.wis_defined.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Serialize)]
struct MomentRow {
    estimator: &'static str,
    regime: &'static str,
    mean: f64,
    bias: f64,
    variance: Option<f64>,
    mse: Option<f64>,
}

impl Tabular for MomentRow {
    fn header(&self) -> Vec<&'static str> {
        vec!["estimator", "regime", "mean", "bias", "variance", "mse"]
    }

    fn record(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.16e}");
        let o = |x: Option<f64>| x.map(f).unwrap_or_default();
        vec![
            self.estimator.to_string(),
            self.regime.to_string(),
            f(self.mean),
            f(self.bias),
            o(self.variance),
            o(self.mse),
        ]
    }
}

fn sampling_only(cv: CvChoice) -> Result<CvMode> {
    match cv {
        CvChoice::None => Ok(CvMode::None),
        CvChoice::SamplingMean => Ok(CvMode::SamplingMean),
        CvChoice::Value(_) => Err(Error::InvalidInput(
            "the treatment sweep takes --cv none or sampling-mean".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate {
            common,
            n,
            f_max,
            theta,
            cv,
        } => {
            let cfg = load(&common)?;
            let spec = cfg
                .problem
                .clone()
                .unwrap_or(ProblemSpec::Illustrative { f_max, theta });
            let problem = spec.build()?;
            let n = n.or(cfg.run.n).unwrap_or(50);
            let seed = common.seed.or(cfg.run.seed).unwrap_or(0);
            let t = match cv.or(cfg.run.cv).unwrap_or(CvChoice::None) {
                CvChoice::None => 0.0,
                CvChoice::Value(t) => t,
                CvChoice::SamplingMean => match spec {
                    ProblemSpec::Treatment { .. } => {
                        let s = SyntheticReturnSurface::default();
                        TreatmentTruth::compute(&problem, &s, 0.0)?.sampling_mean
                    }
                    _ => {
                        return Err(Error::InvalidInput(
                            "sampling-mean needs a treatment problem; use value:<real>".into(),
                        ))
                    }
                },
            };
            let mut stream = RandomStream::new(seed);
            let batch = draw(&problem.sampling, &mut stream, n);
            let e = estimate_all(&problem, &batch, ControlVariate::new(t)?)?;
            let row = EstimateRow {
                n,
                k: e.is.k,
                c: problem.c(),
                c_hat: e.c_hat,
                t,
                is: e.is.value,
                us: e.us.value,
                us_defined: e.us.defined,
                wis: e.wis.value,
                wis_defined: e.wis.defined,
                seed,
            };
            write_rows(&common, &[row])
        }
        Command::SweepIllustrative {
            common,
            f_max,
            theta,
            n,
        } => {
            let cfg = load(&common)?;
            let sweep = IllustrativeSweep {
                f_max_grid: f_max
                    .or(cfg.grids.f_max)
                    .unwrap_or_else(|| DEFAULT_F_MAX_GRID.to_vec()),
                theta_grid: theta.or(cfg.grids.theta).unwrap_or_else(|| vec![0.0, 1.0, 10.0]),
                n_grid: n.or(cfg.grids.n).unwrap_or_else(|| vec![5, 10, 50]),
                trials: common.trials.or(cfg.run.trials).unwrap_or(DEFAULT_TRIALS),
                seed: common.seed.or(cfg.run.seed).unwrap_or(0),
            };
            write_rows(&common, &sweep_illustrative(&sweep)?)
        }
        Command::SweepTreatment {
            common,
            cr_min,
            n,
            cv,
        } => {
            let cfg = load(&common)?;
            let defaults = TreatmentSweep::default();
            let sweep = TreatmentSweep {
                cr_min_grid: cr_min.or(cfg.grids.cr_min).unwrap_or(defaults.cr_min_grid),
                n: n.or(cfg.run.n).unwrap_or(defaults.n),
                trials: common.trials.or(cfg.run.trials).unwrap_or(defaults.trials),
                cv_mode: sampling_only(cv.or(cfg.run.cv).unwrap_or(CvChoice::None))?,
                seed: common.seed.or(cfg.run.seed).unwrap_or(0),
                surface: defaults.surface,
            };
            write_rows(&common, &sweep_treatment_surrogate(&sweep)?)
        }
        Command::Bounds {
            common,
            f_max,
            theta,
            n,
            delta,
            per_side,
        } => {
            let cfg = load(&common)?;
            let sweep = BoundSweep {
                f_max,
                theta,
                n_grid: n.or(cfg.grids.n).unwrap_or_else(|| vec![5, 10, 20, 50, 100]),
                delta: delta.or(cfg.run.delta).unwrap_or(0.1),
                split_delta: !per_side,
                trials: common.trials.or(cfg.run.trials).unwrap_or(10_000),
                seed: common.seed.or(cfg.run.seed).unwrap_or(0),
            };
            write_rows(&common, &sweep_bounds(&sweep)?)
        }
        Command::Coverage {
            common,
            f_max,
            theta,
            n,
            delta,
        } => {
            let cfg = load(&common)?;
            let rows = coverage_study(
                f_max,
                theta,
                &n.or(cfg.grids.n).unwrap_or_else(|| vec![10, 50]),
                delta.or(cfg.run.delta).unwrap_or(0.1),
                common.trials.or(cfg.run.trials).unwrap_or(10_000),
                common.seed.or(cfg.run.seed).unwrap_or(0),
            )?;
            write_rows(&common, &rows)
        }
        Command::Moments {
            common,
            n,
            c,
            v,
            theta,
            kappa,
            cv,
        } => {
            let t = match cv.unwrap_or(CvChoice::None) {
                CvChoice::None => 0.0,
                CvChoice::Value(t) => t,
                CvChoice::SamplingMean => {
                    return Err(Error::InvalidInput("moments takes --cv none or value:<real>".into()))
                }
            };
            let base = MomentInputs::new(n, c, v, theta)?.with_control_variate(t);
            let mut rows = Vec::new();
            for (estimator, e_name) in [(Estimator::Is, "IS"), (Estimator::Us, "US")] {
                let mut regimes = vec![
                    (Regime::Unconditional, "unconditional", base),
                    (Regime::Positive, "k>0", base),
                ];
                if let Some(k) = kappa {
                    regimes.push((Regime::Exact, "k=kappa", base.with_kappa(k)?));
                }
                for (regime, r_name, inputs) in regimes {
                    let r = moment_report(estimator, regime, &inputs)?;
                    rows.push(MomentRow {
                        estimator: e_name,
                        regime: r_name,
                        mean: r.mean,
                        bias: r.bias,
                        variance: r.variance,
                        mse: r.mse,
                    });
                }
            }
            write_rows(&common, &rows)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
