//! Hoeffding confidence bounds on `θ` from IS and US estimates.
//!
//! IS averages `n` i.i.d. terms `w·h` whose range is `b`; US averages the `k`
//! terms in `C`, each scaled by `c`, so their range is `c·b`.

use serde::{Deserialize, Serialize};

use crate::densities::Density;
use crate::error::{Error, Result};
use crate::estimators::EstimateResult;
use crate::problem::{EstimationProblem, EvaluationFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    IsHoeffding,
    UsHoeffding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub estimate: EstimateResult,
    /// Range of `f(x)h(x)/g(x)` over the sampling support.
    pub b: f64,
    pub c: f64,
    pub n: usize,
    /// Per-side failure probability.
    pub delta: f64,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Meaningless when `defined` is false.
    pub value: f64,
    pub defined: bool,
    pub method: BoundMethod,
    pub side: Side,
    /// Distance from the point estimate.
    pub margin: f64,
}

impl BoundRequest {
    fn validate(&self) -> Result<()> {
        if !self.b.is_finite() || self.b < 0.0 {
            return Err(Error::InvalidInput(format!("range b must be finite and >= 0, got {}", self.b)));
        }
        // delta = 1 is admitted as the degenerate zero-margin case.
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::InvalidMass(self.c));
        }
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        Ok(())
    }

    fn signed(&self, margin: f64) -> f64 {
        match self.side {
            Side::Lower => self.estimate.value - margin,
            Side::Upper => self.estimate.value + margin,
        }
    }
}

fn hoeffding_margin(range: f64, count: usize, delta: f64) -> f64 {
    range * ((1.0 / delta).ln() / (2.0 * count as f64)).sqrt()
}

/// `IS ∓ b·√(ln(1/δ) / (2n))`.
pub fn hoeffding_is(req: &BoundRequest) -> Result<BoundResult> {
    req.validate()?;
    let margin = hoeffding_margin(req.b, req.n, req.delta);
    Ok(BoundResult {
        value: req.signed(margin),
        defined: true,
        method: BoundMethod::IsHoeffding,
        side: req.side,
        margin,
    })
}

/// `US ∓ c·b·√(ln(1/δ) / (2k))`; undefined when `k = 0`.
pub fn hoeffding_us(req: &BoundRequest, k: usize) -> Result<BoundResult> {
    req.validate()?;
    if k == 0 {
        return Ok(BoundResult {
            value: 0.0,
            defined: false,
            method: BoundMethod::UsHoeffding,
            side: req.side,
            margin: 0.0,
        });
    }
    let margin = hoeffding_margin(req.c * req.b, k, req.delta);
    Ok(BoundResult {
        value: req.signed(margin),
        defined: true,
        method: BoundMethod::UsHoeffding,
        side: req.side,
        margin,
    })
}

/// Two-sided `1 − δ` interval, spending `δ/2` on each side.
pub fn hoeffding_interval(
    method: BoundMethod,
    estimate: EstimateResult,
    b: f64,
    c: f64,
    n: usize,
    delta: f64,
) -> Result<(BoundResult, BoundResult)> {
    let make = |side| BoundRequest {
        estimate,
        b,
        c,
        n,
        delta: delta / 2.0,
        side,
    };
    let (lo, hi) = (make(Side::Lower), make(Side::Upper));
    match method {
        BoundMethod::IsHoeffding => Ok((hoeffding_is(&lo)?, hoeffding_is(&hi)?)),
        BoundMethod::UsHoeffding => Ok((
            hoeffding_us(&lo, estimate.k)?,
            hoeffding_us(&hi, estimate.k)?,
        )),
    }
}

/// Clamps a bound into the deterministic range of `h`. An undefined bound
/// becomes the conservative end of that range for its side.
pub fn truncate_bound(res: BoundResult, h_lo: f64, h_hi: f64) -> BoundResult {
    debug_assert!(h_lo <= h_hi);
    let value = if res.defined {
        res.value.clamp(h_lo, h_hi)
    } else {
        match res.side {
            Side::Lower => h_lo,
            Side::Upper => h_hi,
        }
    };
    BoundResult {
        value,
        defined: true,
        ..res
    }
}

/// Exact range of `f(x)h(x)/g(x)` over the sampling support, for
/// piecewise-uniform `f` and `g`.
///
/// `h` contributes its exact value per cell when piecewise constant and its
/// declared range otherwise.
pub fn weighted_range(problem: &EstimationProblem) -> Result<f64> {
    let (Density::PiecewiseUniform(f), Density::PiecewiseUniform(g)) =
        (&problem.target, &problem.sampling)
    else {
        return Err(Error::InvalidInput(
            "exact range needs piecewise-uniform target and sampling densities".into(),
        ));
    };
    let mut cuts: Vec<f64> = f
        .edges()
        .iter()
        .chain(g.edges())
        .copied()
        .chain(problem.evaluation.breakpoints())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for cell in cuts.windows(2) {
        let mid = 0.5 * (cell[0] + cell[1]);
        let gx = problem.sampling.pdf(mid);
        if gx <= 0.0 {
            continue;
        }
        let w = problem.target.pdf(mid) / gx;
        let (h_lo, h_hi) = match &problem.evaluation {
            EvaluationFunction::PiecewiseConstant { .. } => {
                let h = problem.evaluation.eval(mid);
                (h, h)
            }
            custom => custom.bounds_on(cell[0], cell[1]),
        };
        for v in [w * h_lo, w * h_hi] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        return Err(Error::InvalidInput("sampling density has empty support".into()));
    }
    Ok(hi - lo)
}
