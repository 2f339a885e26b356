//! Seeded Monte Carlo harness and the sweeps built on it.
//!
//! Trial `i` of a run with master seed `s` draws from
//! [`RandomStream::derived(s, i)`](crate::densities::RandomStream::derived),
//! so results do not depend on how rayon schedules the trials; aggregation
//! runs in trial order afterwards.

mod emit;
mod illustrative;
mod stats;
mod surrogate;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{draw, RandomStream, SampleBatch};
use crate::error::Result;
use crate::estimators::{estimate_all, ControlVariate};
use crate::moments::{moment_report, Estimator, MomentInputs, MomentReport, Regime};
use crate::problem::EstimationProblem;

pub use emit::{emit, render, Format, Tabular};
pub use illustrative::{
    coverage_study, sweep_bounds, sweep_illustrative, BoundRow, BoundSweep, CoverageRow,
    IllustrativeSweep, DEFAULT_F_MAX_GRID,
};
pub use stats::{within_standard_errors, SampleStats};
pub use surrogate::{
    sweep_treatment_surrogate, treatment_problem, CvMode, SyntheticReturnSurface, TreatmentSweep,
    TreatmentTruth, CF_RANGE, CR_RANGE,
};

/// Small preset trial count, for figure-level noise.
pub const STUDY_TRIALS: usize = 2_433;
/// Default trial count; large enough for 3-standard-error agreement checks.
pub const DEFAULT_TRIALS: usize = 200_000;

/// One trial's estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub k: usize,
    pub is: f64,
    pub us: f64,
    pub us_defined: bool,
    pub wis: f64,
    pub wis_defined: bool,
}

/// Runs `trials` independent batches produced by `make_batch` and records the
/// three estimates of each, in trial order.
pub fn simulate_with<F>(
    problem: &EstimationProblem,
    trials: usize,
    cv: ControlVariate,
    seed: u64,
    make_batch: F,
) -> Result<Vec<TrialRecord>>
where
    F: Fn(&mut RandomStream) -> Result<SampleBatch> + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RandomStream::derived(seed, i);
            let batch = make_batch(&mut stream)?;
            let e = estimate_all(problem, &batch, cv)?;
            Ok(TrialRecord {
                k: e.is.k,
                is: e.is.value,
                us: e.us.value,
                us_defined: e.us.defined,
                wis: e.wis.value,
                wis_defined: e.wis.defined,
            })
        })
        .collect()
}

/// [`simulate_with`] drawing plain batches of size `n` from the sampling
/// density.
pub fn simulate_trials(
    problem: &EstimationProblem,
    n: usize,
    trials: usize,
    cv: ControlVariate,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    simulate_with(problem, trials, cv, seed, |stream| {
        Ok(draw(&problem.sampling, stream, n))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub label: String,
    pub trials: usize,
    /// Over every trial, undefined ones contributing their convention value.
    pub all: SampleStats,
    /// Over the trials with `k > 0`; `None` when there were none.
    pub positive: Option<SampleStats>,
    pub undefined_rate: f64,
    pub undefined_rate_se: f64,
}

impl TrialStats {
    fn collect(
        label: &str,
        records: &[TrialRecord],
        truth: f64,
        pick: impl Fn(&TrialRecord) -> (f64, bool),
    ) -> Self {
        let values: Vec<f64> = records.iter().map(|r| pick(r).0).collect();
        let positive: Vec<f64> = records
            .iter()
            .filter(|r| r.k > 0)
            .map(|r| pick(r).0)
            .collect();
        let trials = records.len();
        let undefined = records.iter().filter(|r| !pick(r).1).count();
        let rate = undefined as f64 / trials as f64;
        Self {
            label: label.to_string(),
            trials,
            all: SampleStats::from_values(&values, truth)
                .expect("at least one trial"),
            positive: SampleStats::from_values(&positive, truth),
            undefined_rate: rate,
            undefined_rate_se: (rate * (1.0 - rate) / trials as f64).sqrt(),
        }
    }
}

/// Empirical statistics for the three estimators of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub is: TrialStats,
    pub us: TrialStats,
    pub wis: TrialStats,
}

impl EstimatorStats {
    pub fn from_records(records: &[TrialRecord], truth: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(crate::Error::InvalidInput("at least one trial is required".into()));
        }
        Ok(Self {
            is: TrialStats::collect("IS", records, truth, |r| (r.is, true)),
            us: TrialStats::collect("US", records, truth, |r| (r.us, r.us_defined)),
            wis: TrialStats::collect("WIS", records, truth, |r| (r.wis, r.wis_defined)),
        })
    }

    pub fn get(&self, label: &str) -> Option<&TrialStats> {
        match label {
            "IS" | "is" => Some(&self.is),
            "US" | "us" => Some(&self.us),
            "WIS" | "wis" => Some(&self.wis),
            _ => None,
        }
    }
}

/// Statistics of IS, US and WIS over `trials` batches of size `n`.
pub fn run_trials(
    problem: &EstimationProblem,
    n: usize,
    trials: usize,
    theta_true: f64,
    cv: ControlVariate,
    seed: u64,
) -> Result<EstimatorStats> {
    let records = simulate_trials(problem, n, trials, cv, seed)?;
    EstimatorStats::from_records(&records, theta_true)
}

/// Which coordinate a sweep row varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    FMax,
    CrMin,
}

/// Closed-form IS and US moments, unconditional and given `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticColumns {
    pub is_unconditional: MomentReport,
    pub is_positive: MomentReport,
    pub us_unconditional: MomentReport,
    pub us_positive: MomentReport,
}

impl AnalyticColumns {
    pub fn compute(inputs: &MomentInputs) -> Result<Self> {
        Ok(Self {
            is_unconditional: moment_report(Estimator::Is, Regime::Unconditional, inputs)?,
            is_positive: moment_report(Estimator::Is, Regime::Positive, inputs)?,
            us_unconditional: moment_report(Estimator::Us, Regime::Unconditional, inputs)?,
            us_positive: moment_report(Estimator::Us, Regime::Positive, inputs)?,
        })
    }
}

/// One configuration of a sweep: its coordinates, the closed forms and the
/// empirical statistics, all for the same `(n, c, v, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    /// `f_max` or `cr_min`, per `axis`.
    pub coordinate: f64,
    pub theta: f64,
    /// Control variate.
    pub t: f64,
    pub n: usize,
    pub c: f64,
    pub v: f64,
    pub analytic: AnalyticColumns,
    pub empirical: EstimatorStats,
    pub seed: u64,
}
