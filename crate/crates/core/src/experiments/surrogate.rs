//! A synthetic stand-in for the insulin-dosing study.
//!
//! A policy is a pair of carbohydrate ratio `CR ∈ [8.5, 11]` and correction
//! factor `CF ∈ [10, 15]`. Both the sampling and the target policy draw `CF`
//! uniformly, so it carries no importance weight and is integrated out of
//! `h`; each sample still draws its own `CF` and noise so the outcomes keep
//! their full spread.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{simulate_with, AnalyticColumns, EstimatorStats, SweepAxis, SweepRow};
use crate::densities::{draw, Density, IntervalSet, RandomStream, SampleBatch};
use crate::error::{Error, Result};
use crate::estimators::ControlVariate;
use crate::moments::MomentInputs;
use crate::problem::{EstimationProblem, EvaluationFunction, PruningSet};

pub const CR_RANGE: (f64, f64) = (8.5, 11.0);
pub const CF_RANGE: (f64, f64) = (10.0, 15.0);

const SIMPSON_PANELS: usize = 100_000;

/// Expected daily return
///
/// `r(CR, CF) = peak − cr_curvature·(11 − CR)² − cf_curvature·(CF − cf_center)²`
///
/// observed with additive `N(0, noise_sd²)` noise. It rises monotonically
/// toward `CR = 11`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticReturnSurface {
    pub peak: f64,
    pub cr_curvature: f64,
    pub cf_curvature: f64,
    pub cf_center: f64,
    pub noise_sd: f64,
}

impl Default for SyntheticReturnSurface {
    fn default() -> Self {
        Self {
            peak: 0.30,
            cr_curvature: 0.008,
            cf_curvature: 0.0004,
            cf_center: 12.5,
            noise_sd: 0.02,
        }
    }
}

/// `E[(U − a)^p]` for `U ~ U[lo, hi]`.
fn uniform_shifted_moment(lo: f64, hi: f64, a: f64, p: i32) -> f64 {
    let (l, h) = (lo - a, hi - a);
    (h.powi(p + 1) - l.powi(p + 1)) / (f64::from(p + 1) * (hi - lo))
}

impl SyntheticReturnSurface {
    pub fn expected_return(&self, cr: f64, cf: f64) -> f64 {
        self.peak
            - self.cr_curvature * (CR_RANGE.1 - cr).powi(2)
            - self.cf_curvature * (cf - self.cf_center).powi(2)
    }

    /// `E[r | CR = cr]` with `CF` uniform.
    pub fn conditional_mean(&self, cr: f64) -> f64 {
        let (lo, hi) = CF_RANGE;
        self.peak
            - self.cr_curvature * (CR_RANGE.1 - cr).powi(2)
            - self.cf_curvature * uniform_shifted_moment(lo, hi, self.cf_center, 2)
    }

    /// `E[Y² | CR = cr]` for the noisy outcome `Y`.
    pub fn conditional_second_moment(&self, cr: f64) -> f64 {
        let (lo, hi) = CF_RANGE;
        let m2 = uniform_shifted_moment(lo, hi, self.cf_center, 2);
        let m4 = uniform_shifted_moment(lo, hi, self.cf_center, 4);
        let cf_var = self.cf_curvature.powi(2) * (m4 - m2 * m2);
        self.conditional_mean(cr).powi(2) + cf_var + self.noise_sd.powi(2)
    }

    /// One noisy outcome at `cr`, drawing `CF` then the noise.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, cr: f64, rng: &mut R) -> f64 {
        let (lo, hi) = CF_RANGE;
        let cf = lo + (hi - lo) * rng.random::<f64>();
        let z: f64 = rng.sample(StandardNormal);
        self.expected_return(cr, cf) + self.noise_sd * z
    }
}

fn check_cr_min(cr_min: f64) -> Result<()> {
    if !(cr_min >= CR_RANGE.0 && cr_min < CR_RANGE.1) {
        return Err(Error::InvalidInput(format!(
            "cr_min must lie in [{}, {}), got {cr_min}",
            CR_RANGE.0, CR_RANGE.1
        )));
    }
    Ok(())
}

/// `g = U[8.5, 11]`, `f = TN(mean 11, sd 11 − cr_min)` on `[cr_min, 11]`,
/// `h = E[r | CR]` and `C = [cr_min, 11]`, so `c = (11 − cr_min) / 2.5`.
pub fn treatment_problem(
    cr_min: f64,
    surface: &SyntheticReturnSurface,
) -> Result<EstimationProblem> {
    check_cr_min(cr_min)?;
    let (lo, hi) = CR_RANGE;
    let sampling = Density::uniform(lo, hi)?;
    let target = Density::truncated_normal(cr_min, hi, hi, hi - cr_min)?;
    let s = *surface;
    let (a, b) = (s.conditional_mean(lo), s.conditional_mean(hi));
    let evaluation = EvaluationFunction::custom(
        move |cr| s.conditional_mean(cr),
        IntervalSet::single(lo, hi)?,
        a.min(b),
        a.max(b),
    )?;
    let pruning = PruningSet::from_intervals(IntervalSet::single(cr_min, hi)?, &sampling)?;
    Ok(EstimationProblem::new(target, sampling, evaluation, pruning))
}

fn simpson(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / SIMPSON_PANELS as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..SIMPSON_PANELS {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

/// Quadrature ground truth for one `cr_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreatmentTruth {
    /// `E_f[r]`.
    pub theta: f64,
    /// `E_g[r]`, the sampling-mean control variate.
    pub sampling_mean: f64,
    /// Conditional variance of one in-`C` term `w (Y − t)` for the given `t`.
    pub v: f64,
    pub c: f64,
}

impl TreatmentTruth {
    pub fn compute(
        problem: &EstimationProblem,
        surface: &SyntheticReturnSurface,
        t: f64,
    ) -> Result<Self> {
        let hull = problem
            .target
            .support_hull()
            .ok_or_else(|| Error::InvalidInput("target support is empty".into()))?;
        let (lo, hi) = CR_RANGE;
        let c = problem.c();
        let f = |x: f64| problem.target.pdf(x);
        let g = |x: f64| problem.sampling.pdf(x);
        let theta = simpson(hull.lo, hull.hi, |x| f(x) * surface.conditional_mean(x));
        let sampling_mean = simpson(lo, hi, |x| g(x) * surface.conditional_mean(x));
        let second = simpson(hull.lo, hull.hi, |x| {
            let m = surface.conditional_mean(x);
            let s2 = surface.conditional_second_moment(x);
            f(x) * f(x) / g(x) * (s2 - 2.0 * t * m + t * t)
        });
        let v = (second / c - ((theta - t) / c).powi(2)).max(0.0);
        Ok(Self {
            theta,
            sampling_mean,
            v,
            c,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvMode {
    None,
    /// `t = E_g[r]`.
    SamplingMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentSweep {
    pub cr_min_grid: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub cv_mode: CvMode,
    pub seed: u64,
    #[serde(default)]
    pub surface: SyntheticReturnSurface,
}

impl Default for TreatmentSweep {
    fn default() -> Self {
        Self {
            cr_min_grid: vec![8.5, 9.0, 9.5, 10.0, 10.375, 10.5, 10.75],
            n: 30,
            trials: super::DEFAULT_TRIALS,
            cv_mode: CvMode::None,
            seed: 0,
            surface: SyntheticReturnSurface::default(),
        }
    }
}

fn treatment_batch(
    problem: &EstimationProblem,
    surface: &SyntheticReturnSurface,
    n: usize,
    stream: &mut RandomStream,
) -> Result<SampleBatch> {
    let batch = draw(&problem.sampling, stream, n);
    let outcomes = batch
        .values
        .iter()
        .map(|&cr| surface.sample_outcome(cr, stream))
        .collect();
    batch.with_outcomes(outcomes)
}

/// One row per `cr_min`; row `i` uses seed `seed + i`.
pub fn sweep_treatment_surrogate(cfg: &TreatmentSweep) -> Result<Vec<SweepRow>> {
    if cfg.cr_min_grid.is_empty() {
        return Err(Error::InvalidInput("cr_min grid is empty".into()));
    }
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(Error::InvalidInput("n and trials must be at least 1".into()));
    }
    cfg.cr_min_grid.iter().try_for_each(|&x| check_cr_min(x))?;

    let surface = &cfg.surface;
    let mut rows = Vec::with_capacity(cfg.cr_min_grid.len());
    for (i, &cr_min) in cfg.cr_min_grid.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let problem = treatment_problem(cr_min, surface)?;
        let t = match cfg.cv_mode {
            CvMode::None => 0.0,
            CvMode::SamplingMean => TreatmentTruth::compute(&problem, surface, 0.0)?.sampling_mean,
        };
        let truth = TreatmentTruth::compute(&problem, surface, t)?;
        let inputs = MomentInputs::new(cfg.n as u64, truth.c, truth.v, truth.theta)?
            .with_control_variate(t);
        let records = simulate_with(&problem, cfg.trials, ControlVariate::new(t)?, seed, |s| {
            treatment_batch(&problem, surface, cfg.n, s)
        })?;
        rows.push(SweepRow {
            axis: SweepAxis::CrMin,
            coordinate: cr_min,
            theta: truth.theta,
            t,
            n: cfg.n,
            c: truth.c,
            v: truth.v,
            analytic: AnalyticColumns::compute(&inputs)?,
            empirical: EstimatorStats::from_records(&records, truth.theta)?,
            seed,
        });
    }
    Ok(rows)
}
