//! Sweeps over the scaled illustrative family: variance curves, confidence
//! bounds and bound coverage.

use serde::{Deserialize, Serialize};

use super::emit::{fmt_float, Tabular};
use super::{simulate_trials, AnalyticColumns, EstimatorStats, SweepAxis, SweepRow, TrialRecord};
use crate::bounds::{hoeffding_is, hoeffding_us, truncate_bound, weighted_range, BoundRequest, Side};
use crate::error::{Error, Result};
use crate::estimators::{ControlVariate, EstimateResult};
use crate::moments::{illustrative_params, rho, MomentInputs};
use crate::problem::{illustrative_problem, EstimationProblem};

/// `f_max ∈ {0.1, 0.2, …, 2.0}`.
pub const DEFAULT_F_MAX_GRID: [f64; 20] = [
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9,
    2.0,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllustrativeSweep {
    pub f_max_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

fn check_grid<T>(name: &str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput(format!("{name} grid is empty")));
    }
    Ok(())
}

fn check_common(n_grid: &[usize], trials: usize) -> Result<()> {
    check_grid("n", n_grid)?;
    if n_grid.contains(&0) {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    Ok(())
}

/// One row per `(θ, n, f_max)`, in that nesting order. Row `i` uses seed
/// `seed + i`.
pub fn sweep_illustrative(cfg: &IllustrativeSweep) -> Result<Vec<SweepRow>> {
    check_grid("f_max", &cfg.f_max_grid)?;
    check_grid("theta", &cfg.theta_grid)?;
    check_common(&cfg.n_grid, cfg.trials)?;
    let mut rows = Vec::new();
    for &theta in &cfg.theta_grid {
        for &n in &cfg.n_grid {
            for &f_max in &cfg.f_max_grid {
                let seed = cfg.seed.wrapping_add(rows.len() as u64);
                rows.push(illustrative_row(f_max, theta, n, cfg.trials, seed)?);
            }
        }
    }
    Ok(rows)
}

fn illustrative_row(f_max: f64, theta: f64, n: usize, trials: usize, seed: u64) -> Result<SweepRow> {
    let problem = illustrative_problem(f_max, theta)?;
    let params = illustrative_params(f_max)?;
    let inputs = MomentInputs::new(n as u64, params.c, params.v, theta)?;
    let records = simulate_trials(&problem, n, trials, ControlVariate::NONE, seed)?;
    Ok(SweepRow {
        axis: SweepAxis::FMax,
        coordinate: f_max,
        theta,
        t: 0.0,
        n,
        c: params.c,
        v: params.v,
        analytic: AnalyticColumns::compute(&inputs)?,
        empirical: EstimatorStats::from_records(&records, theta)?,
        seed,
    })
}

impl Tabular for SweepRow {
    fn header(&self) -> Vec<&'static str> {
        let mut h = match self.axis {
            SweepAxis::FMax => vec!["f_max", "theta"],
            SweepAxis::CrMin => vec!["cr_min", "theta", "t"],
        };
        h.extend([
            "n",
            "c",
            "v",
            "analytic_is_var_u",
            "analytic_is_var_c",
            "analytic_us_var_u",
            "analytic_us_var_c",
            "analytic_us_mse_u",
            "emp_is_mean",
            "emp_is_var",
            "emp_is_mse",
            "emp_us_mean",
            "emp_us_var",
            "emp_us_mse",
            "emp_wis_mean",
            "emp_wis_var",
            "emp_wis_mse",
            "undefined_rate",
            "seed",
        ]);
        h
    }

    fn record(&self) -> Vec<String> {
        let a = &self.analytic;
        let e = &self.empirical;
        let var = |r: &crate::moments::MomentReport| r.variance.unwrap_or(f64::NAN);
        let mut out = vec![fmt_float(self.coordinate), fmt_float(self.theta)];
        if self.axis == SweepAxis::CrMin {
            out.push(fmt_float(self.t));
        }
        out.push(self.n.to_string());
        out.extend(
            [
                self.c,
                self.v,
                var(&a.is_unconditional),
                var(&a.is_positive),
                var(&a.us_unconditional),
                var(&a.us_positive),
                a.us_unconditional.mse.unwrap_or(f64::NAN),
                e.is.all.mean,
                e.is.all.variance,
                e.is.all.mse,
                e.us.all.mean,
                e.us.all.variance,
                e.us.all.mse,
                e.wis.all.mean,
                e.wis.all.variance,
                e.wis.all.mse,
                e.us.undefined_rate,
            ]
            .map(fmt_float),
        );
        out.push(self.seed.to_string());
        out
    }
}

/// Mean Hoeffding intervals of IS and US over many trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSweep {
    pub f_max: f64,
    pub theta: f64,
    pub n_grid: Vec<usize>,
    pub delta: f64,
    /// Spend `δ/2` per side for a `1 − δ` two-sided interval; otherwise each
    /// side uses `δ`.
    pub split_delta: bool,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub f_max: f64,
    pub theta: f64,
    pub n: usize,
    pub c: f64,
    pub b: f64,
    pub delta_per_side: f64,
    pub is_lower_mean: f64,
    pub is_upper_mean: f64,
    pub is_margin_mean: f64,
    /// Averages over trials with `k > 0` only.
    pub us_lower_mean: Option<f64>,
    pub us_upper_mean: Option<f64>,
    pub us_margin_mean: Option<f64>,
    pub us_defined_trials: usize,
    /// Clamped into `[h_lo, h_hi]`; undefined US bounds become the ends of
    /// that range, so these average over every trial.
    pub is_lower_truncated_mean: f64,
    pub is_upper_truncated_mean: f64,
    pub us_lower_truncated_mean: f64,
    pub us_upper_truncated_mean: f64,
    pub h_lo: f64,
    pub h_hi: f64,
    pub rho_empirical: f64,
    pub rho_se: f64,
    pub rho_analytic: f64,
    pub seed: u64,
}

/// Deterministic bounds on `h` over the target support.
fn target_h_range(problem: &EstimationProblem) -> (f64, f64) {
    match problem.target.support_hull() {
        Some(hull) => problem.evaluation.bounds_on(hull.lo, hull.hi),
        None => problem.evaluation.range(),
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

struct TrialBounds {
    is_lower: f64,
    is_upper: f64,
    is_margin: f64,
    us: Option<(f64, f64, f64)>,
    k: usize,
    us_lower_truncated: f64,
    us_upper_truncated: f64,
}

fn bounds_for(
    r: &TrialRecord,
    b: f64,
    c: f64,
    n: usize,
    delta: f64,
    h_range: (f64, f64),
) -> Result<TrialBounds> {
    let req = |value: f64, side| BoundRequest {
        estimate: EstimateResult {
            value,
            k: r.k,
            defined: true,
        },
        b,
        c,
        n,
        delta,
        side,
    };
    let is_lo = hoeffding_is(&req(r.is, Side::Lower))?;
    let is_hi = hoeffding_is(&req(r.is, Side::Upper))?;
    let us_lo = hoeffding_us(&req(r.us, Side::Lower), r.k)?;
    let us_hi = hoeffding_us(&req(r.us, Side::Upper), r.k)?;
    Ok(TrialBounds {
        is_lower: is_lo.value,
        is_upper: is_hi.value,
        is_margin: is_lo.margin,
        us: us_lo.defined.then_some((us_lo.value, us_hi.value, us_lo.margin)),
        k: r.k,
        us_lower_truncated: truncate_bound(us_lo, h_range.0, h_range.1).value,
        us_upper_truncated: truncate_bound(us_hi, h_range.0, h_range.1).value,
    })
}

pub fn sweep_bounds(cfg: &BoundSweep) -> Result<Vec<BoundRow>> {
    check_common(&cfg.n_grid, cfg.trials)?;
    let problem = illustrative_problem(cfg.f_max, cfg.theta)?;
    let c = problem.c();
    let b = weighted_range(&problem)?;
    let (h_lo, h_hi) = target_h_range(&problem);
    let delta = if cfg.split_delta { cfg.delta / 2.0 } else { cfg.delta };

    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let records = simulate_trials(&problem, n, cfg.trials, ControlVariate::NONE, seed)?;
        let per_trial = records
            .iter()
            .map(|r| bounds_for(r, b, c, n, delta, (h_lo, h_hi)))
            .collect::<Result<Vec<_>>>()?;
        let defined = per_trial.iter().filter(|t| t.us.is_some()).count();
        let trials = records.len() as f64;
        let rho_emp = defined as f64 / trials;
        let clamp = |x: f64| x.clamp(h_lo, h_hi);
        rows.push(BoundRow {
            f_max: cfg.f_max,
            theta: cfg.theta,
            n,
            c,
            b,
            delta_per_side: delta,
            is_lower_mean: mean(per_trial.iter().map(|t| t.is_lower)).unwrap_or_default(),
            is_upper_mean: mean(per_trial.iter().map(|t| t.is_upper)).unwrap_or_default(),
            is_margin_mean: mean(per_trial.iter().map(|t| t.is_margin)).unwrap_or_default(),
            us_lower_mean: mean(per_trial.iter().filter_map(|t| t.us.map(|u| u.0))),
            us_upper_mean: mean(per_trial.iter().filter_map(|t| t.us.map(|u| u.1))),
            us_margin_mean: mean(per_trial.iter().filter_map(|t| t.us.map(|u| u.2))),
            us_defined_trials: defined,
            is_lower_truncated_mean: mean(per_trial.iter().map(|t| clamp(t.is_lower)))
                .unwrap_or_default(),
            is_upper_truncated_mean: mean(per_trial.iter().map(|t| clamp(t.is_upper)))
                .unwrap_or_default(),
            us_lower_truncated_mean: mean(per_trial.iter().map(|t| t.us_lower_truncated))
                .unwrap_or_default(),
            us_upper_truncated_mean: mean(per_trial.iter().map(|t| t.us_upper_truncated))
                .unwrap_or_default(),
            h_lo,
            h_hi,
            rho_empirical: rho_emp,
            rho_se: (rho_emp * (1.0 - rho_emp) / trials).sqrt(),
            rho_analytic: rho(n as u64, c),
            seed,
        });
        debug_assert!(per_trial.iter().all(|t| t.k <= n));
    }
    Ok(rows)
}

impl Tabular for BoundRow {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "f_max",
            "theta",
            "n",
            "c",
            "b",
            "delta_per_side",
            "is_lower_mean",
            "is_upper_mean",
            "is_margin_mean",
            "us_lower_mean",
            "us_upper_mean",
            "us_margin_mean",
            "us_defined_trials",
            "is_lower_truncated_mean",
            "is_upper_truncated_mean",
            "us_lower_truncated_mean",
            "us_upper_truncated_mean",
            "h_lo",
            "h_hi",
            "rho_empirical",
            "rho_se",
            "rho_analytic",
            "seed",
        ]
    }

    fn record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        vec![
            fmt_float(self.f_max),
            fmt_float(self.theta),
            self.n.to_string(),
            fmt_float(self.c),
            fmt_float(self.b),
            fmt_float(self.delta_per_side),
            fmt_float(self.is_lower_mean),
            fmt_float(self.is_upper_mean),
            fmt_float(self.is_margin_mean),
            opt(self.us_lower_mean),
            opt(self.us_upper_mean),
            opt(self.us_margin_mean),
            self.us_defined_trials.to_string(),
            fmt_float(self.is_lower_truncated_mean),
            fmt_float(self.is_upper_truncated_mean),
            fmt_float(self.us_lower_truncated_mean),
            fmt_float(self.us_upper_truncated_mean),
            fmt_float(self.h_lo),
            fmt_float(self.h_hi),
            fmt_float(self.rho_empirical),
            fmt_float(self.rho_se),
            fmt_float(self.rho_analytic),
            self.seed.to_string(),
        ]
    }
}

/// One-sided lower-bound coverage of `θ` at confidence `1 − δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub f_max: f64,
    pub theta: f64,
    pub n: usize,
    pub c: f64,
    pub b: f64,
    pub delta: f64,
    pub trials: usize,
    /// Fraction of trials whose IS lower bound is at most `θ`.
    pub is_coverage: f64,
    /// Same for US, among trials with `k > 0`.
    pub us_coverage: Option<f64>,
    pub us_defined_trials: usize,
    pub is_margin_mean: f64,
    pub us_margin_mean: Option<f64>,
    /// `us_margin_mean / is_margin_mean`.
    pub margin_ratio: Option<f64>,
    /// `c·√(n / k̄)` with `k̄` the mean count over trials with `k > 0`.
    pub predicted_ratio: Option<f64>,
    pub seed: u64,
}

pub fn coverage_study(
    f_max: f64,
    theta: f64,
    n_grid: &[usize],
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<CoverageRow>> {
    check_common(n_grid, trials)?;
    let problem = illustrative_problem(f_max, theta)?;
    let c = problem.c();
    let b = weighted_range(&problem)?;
    let h_range = target_h_range(&problem);
    let mut rows = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let seed = seed.wrapping_add(i as u64);
        let records = simulate_trials(&problem, n, trials, ControlVariate::NONE, seed)?;
        let per_trial = records
            .iter()
            .map(|r| bounds_for(r, b, c, n, delta, h_range))
            .collect::<Result<Vec<_>>>()?;
        let is_hits = per_trial.iter().filter(|t| t.is_lower <= theta).count();
        let defined: Vec<&TrialBounds> = per_trial.iter().filter(|t| t.us.is_some()).collect();
        let us_hits = defined
            .iter()
            .filter(|t| t.us.is_some_and(|u| u.0 <= theta))
            .count();
        let is_margin_mean = mean(per_trial.iter().map(|t| t.is_margin)).unwrap_or_default();
        let us_margin_mean = mean(defined.iter().filter_map(|t| t.us.map(|u| u.2)));
        let k_mean = mean(defined.iter().map(|t| t.k as f64));
        rows.push(CoverageRow {
            f_max,
            theta,
            n,
            c,
            b,
            delta,
            trials,
            is_coverage: is_hits as f64 / trials as f64,
            us_coverage: (!defined.is_empty()).then(|| us_hits as f64 / defined.len() as f64),
            us_defined_trials: defined.len(),
            is_margin_mean,
            us_margin_mean,
            margin_ratio: us_margin_mean.map(|m| m / is_margin_mean),
            predicted_ratio: k_mean.map(|k| c * (n as f64 / k).sqrt()),
            seed,
        });
    }
    Ok(rows)
}

impl Tabular for CoverageRow {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "f_max",
            "theta",
            "n",
            "c",
            "b",
            "delta",
            "trials",
            "is_coverage",
            "us_coverage",
            "us_defined_trials",
            "is_margin_mean",
            "us_margin_mean",
            "margin_ratio",
            "predicted_ratio",
            "seed",
        ]
    }

    fn record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        vec![
            fmt_float(self.f_max),
            fmt_float(self.theta),
            self.n.to_string(),
            fmt_float(self.c),
            fmt_float(self.b),
            fmt_float(self.delta),
            self.trials.to_string(),
            fmt_float(self.is_coverage),
            opt(self.us_coverage),
            self.us_defined_trials.to_string(),
            fmt_float(self.is_margin_mean),
            opt(self.us_margin_mean),
            opt(self.margin_ratio),
            opt(self.predicted_ratio),
            self.seed.to_string(),
        ]
    }
}
