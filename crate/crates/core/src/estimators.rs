//! IS, US and WIS point estimates.
//!
//! All three are computed from the same per-sample terms `w_i = f(X_i)/g(X_i)`
//! and `y_i = h(X_i)` (or the batch's observed outcome). Sums are accumulated
//! left to right with Neumaier compensation.

use serde::{Deserialize, Serialize};

use crate::densities::SampleBatch;
use crate::error::{Error, Result};
use crate::problem::EstimationProblem;
use crate::sum::CompensatedSum;

/// A constant subtracted from every `h(X_i)` and added back to the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlVariate {
    pub t: f64,
}

impl ControlVariate {
    pub const NONE: Self = Self { t: 0.0 };

    pub fn new(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("control variate must be finite, got {t}")));
        }
        Ok(Self { t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    /// Number of samples in the pruning set.
    pub k: usize,
    /// False exactly when the estimator fell back to its convention value.
    pub defined: bool,
}

impl EstimateResult {
    fn undefined(k: usize) -> Self {
        Self {
            value: 0.0,
            k,
            defined: false,
        }
    }
}

/// `f(x) / g(x)`; fails when `x` is impossible under `g`.
pub fn importance_weight(problem: &EstimationProblem, x: f64) -> Result<f64> {
    let g = problem.sampling.pdf(x);
    if g.is_nan() || g <= 0.0 {
        return Err(Error::ImpossibleSample { x });
    }
    Ok(problem.target.pdf(x) / g)
}

pub fn count_in_c(problem: &EstimationProblem, batch: &SampleBatch) -> usize {
    batch
        .values
        .iter()
        .filter(|&&x| problem.pruning.contains(x))
        .count()
}

/// Everything the estimators need from one pass over a batch.
#[derive(Debug, Default)]
struct Sums {
    n: usize,
    k: usize,
    /// Σ w (y − t) over all samples.
    shifted_all: CompensatedSum,
    /// Σ w (y − t) over samples in C.
    shifted_in_c: CompensatedSum,
    /// Σ w y over all samples.
    weighted: CompensatedSum,
    /// Σ w over all samples.
    weights: CompensatedSum,
    /// First sample outside C with f(x)·y ≠ 0.
    support_violation: Option<f64>,
    /// First sample outside C with f(x) ≠ 0.
    target_outside_c: Option<f64>,
}

fn accumulate(problem: &EstimationProblem, batch: &SampleBatch, t: f64) -> Result<Sums> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if let Some(o) = &batch.outcomes {
        if o.len() != batch.n() {
            return Err(Error::OutcomeLengthMismatch {
                values: batch.n(),
                outcomes: o.len(),
            });
        }
    }
    let mut s = Sums {
        n: batch.n(),
        ..Sums::default()
    };
    for (i, &x) in batch.values.iter().enumerate() {
        let w = importance_weight(problem, x)?;
        let y = match &batch.outcomes {
            Some(o) => o[i],
            None => problem.evaluation.eval(x),
        };
        let shifted = w * (y - t);
        s.shifted_all.add(shifted);
        s.weighted.add(w * y);
        s.weights.add(w);
        if problem.pruning.contains(x) {
            s.k += 1;
            s.shifted_in_c.add(shifted);
        } else if w != 0.0 {
            s.target_outside_c.get_or_insert(x);
            if y != 0.0 {
                s.support_violation.get_or_insert(x);
            }
        }
    }
    Ok(s)
}

/// Ordinary importance sampling: `t + (1/n) Σ w_i (h(X_i) − t)`.
pub fn is_estimate(
    problem: &EstimationProblem,
    batch: &SampleBatch,
    cv: ControlVariate,
) -> Result<EstimateResult> {
    let s = accumulate(problem, batch, cv.t)?;
    Ok(EstimateResult {
        value: cv.t + s.shifted_all.value() / s.n as f64,
        k: s.k,
        defined: true,
    })
}

fn us_from_sums(s: &Sums, c: f64, t: f64) -> Result<EstimateResult> {
    if let Some(x) = s.support_violation {
        return Err(Error::SupportViolation { x });
    }
    if t != 0.0 {
        if let Some(x) = s.target_outside_c {
            return Err(Error::ControlVariateOutsidePruning { x });
        }
    }
    if s.k == 0 {
        return Ok(EstimateResult::undefined(0));
    }
    Ok(EstimateResult {
        value: t + c * s.shifted_in_c.value() / s.k as f64,
        k: s.k,
        defined: true,
    })
}

/// Importance sampling with unequal support:
/// `t + (c/k) Σ_{X_i ∈ C} w_i (h(X_i) − t)`, or `(0, undefined)` when `k = 0`.
///
/// A nonzero control variate shifts `h` off its support, so it is only
/// accepted when `C` covers the whole target support.
pub fn us_estimate(
    problem: &EstimationProblem,
    batch: &SampleBatch,
    cv: ControlVariate,
) -> Result<EstimateResult> {
    let s = accumulate(problem, batch, cv.t)?;
    us_from_sums(&s, problem.c(), cv.t)
}

/// US with `c` replaced by the empirical `k/n`; coincides with IS at `t = 0`.
pub fn us_estimate_empirical_c(
    problem: &EstimationProblem,
    batch: &SampleBatch,
) -> Result<EstimateResult> {
    let s = accumulate(problem, batch, 0.0)?;
    if let Some(x) = s.support_violation {
        return Err(Error::SupportViolation { x });
    }
    if s.k == 0 {
        return Ok(EstimateResult::undefined(0));
    }
    let c_hat = s.k as f64 / s.n as f64;
    Ok(EstimateResult {
        value: c_hat * s.weighted.value() / s.k as f64,
        k: s.k,
        defined: true,
    })
}

fn wis_from_sums(s: &Sums) -> EstimateResult {
    let weights = s.weights.value();
    if weights > 0.0 {
        EstimateResult {
            value: s.weighted.value() / weights,
            k: s.k,
            defined: true,
        }
    } else {
        EstimateResult::undefined(s.k)
    }
}

/// Weighted importance sampling `Σ w_i h(X_i) / Σ w_i`.
///
/// Self-normalization makes the estimate invariant to a constant control
/// variate, so none is taken.
pub fn wis_estimate(problem: &EstimationProblem, batch: &SampleBatch) -> Result<EstimateResult> {
    let s = accumulate(problem, batch, 0.0)?;
    Ok(wis_from_sums(&s))
}

/// IS, US and WIS on one batch from a single pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub is: EstimateResult,
    pub us: EstimateResult,
    pub wis: EstimateResult,
    pub c_hat: f64,
}

pub fn estimate_all(
    problem: &EstimationProblem,
    batch: &SampleBatch,
    cv: ControlVariate,
) -> Result<Estimates> {
    let s = accumulate(problem, batch, cv.t)?;
    Ok(Estimates {
        is: EstimateResult {
            value: cv.t + s.shifted_all.value() / s.n as f64,
            k: s.k,
            defined: true,
        },
        us: us_from_sums(&s, problem.c(), cv.t)?,
        wis: wis_from_sums(&s),
        c_hat: s.k as f64 / s.n as f64,
    })
}
