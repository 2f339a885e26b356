//! Univariate densities, interval sets, seeded random streams and sample
//! batches.
//!
//! Two density families are built in: piecewise-uniform (which covers every
//! uniform-to-uniform configuration) and truncated normal. Anything else can
//! be plugged in through [`CustomDensity`].
//!
//! Supports are closed: a point sitting exactly on the boundary of a
//! positive-mass interval is inside the support, and [`Density::pdf`] returns
//! the adjacent interval's height there.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    fn overlap_len(&self, lo: f64, hi: f64) -> f64 {
        (self.hi.min(hi) - self.lo.max(lo)).max(0.0)
    }
}

/// A finite union of pairwise-disjoint closed intervals, kept sorted.
///
/// Intervals may touch at an endpoint; any overlap of positive length is
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            Interval::new(iv.lo, iv.hi)?;
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for pair in intervals.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.hi > b.lo {
                return Err(Error::OverlappingIntervals(a.lo, a.hi, b.lo, b.hi));
            }
        }
        Ok(Self { intervals })
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Interval::new(lo, hi)?])
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let intervals = pairs
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Self::new(intervals)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Total Lebesgue length.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }
}

impl TryFrom<Vec<Interval>> for IntervalSet {
    type Error = Error;

    fn try_from(v: Vec<Interval>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IntervalSet> for Vec<Interval> {
    fn from(s: IntervalSet) -> Self {
        s.intervals
    }
}

/// Piecewise-constant density on consecutive cells `[edges[i], edges[i+1]]`.
///
/// `masses[i]` is the probability of cell `i`; masses are normalized on
/// construction, and zero-mass cells model gaps in the support.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseUniform {
    edges: Vec<f64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PiecewiseUniform {
    pub fn new(edges: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || masses.len() != edges.len() - 1 {
            return Err(Error::InvalidDensity(format!(
                "need n+1 edges for n masses, got {} edges and {} masses",
                edges.len(),
                masses.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDensity(
                "edges must be finite and strictly increasing".into(),
            ));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidDensity("masses must be finite and nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDensity("total mass must be positive".into()));
        }
        let masses: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        Ok(Self {
            edges,
            masses,
            cumulative,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![1.0])
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Iterates `(lo, hi, height)` over all cells.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.masses)
            .map(|(w, m)| (w[0], w[1], m / (w[1] - w[0])))
    }

    fn pdf(&self, x: f64) -> f64 {
        self.cells()
            .find(|&(lo, hi, height)| height > 0.0 && lo <= x && x <= hi)
            .map_or(0.0, |(_, _, height)| height)
    }

    fn mass(&self, set: &IntervalSet) -> f64 {
        let mut total = 0.0;
        for (lo, hi, height) in self.cells() {
            if height == 0.0 {
                continue;
            }
            for iv in set.intervals() {
                total += height * iv.overlap_len(lo, hi);
            }
        }
        total.min(1.0)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let last = self.masses.len() - 1;
        let i = self.cumulative.partition_point(|&c| c <= u).min(last);
        let start = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        let (lo, hi) = (self.edges[i], self.edges[i + 1]);
        let frac = ((u - start) / self.masses[i]).clamp(0.0, 1.0);
        (lo + frac * (hi - lo)).clamp(lo, hi)
    }
}

/// Normal distribution truncated to `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    lower: f64,
    upper: f64,
    mean: f64,
    sd: f64,
    /// Standardized bounds.
    alpha: f64,
    beta: f64,
    /// Normalizing mass `Φ(beta) − Φ(alpha)`.
    z: f64,
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Starting guess from `erfc_inv`, polished by one Halley step.
fn std_normal_quantile(p: f64) -> f64 {
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    let e = std_normal_cdf(x) - p;
    let u = e / (INV_SQRT_2PI * (-0.5 * x * x).exp());
    x - u / (1.0 + 0.5 * x * u)
}

impl TruncatedNormal {
    pub fn new(lower: f64, upper: f64, mean: f64, sd: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && mean.is_finite() && sd.is_finite()) {
            return Err(Error::InvalidDensity("truncated normal parameters must be finite".into()));
        }
        if lower >= upper || sd <= 0.0 {
            return Err(Error::InvalidDensity(format!(
                "truncated normal needs lower < upper and sd > 0, got [{lower}, {upper}], sd {sd}"
            )));
        }
        let alpha = (lower - mean) / sd;
        let beta = (upper - mean) / sd;
        let z = Self::standard_mass(alpha, beta);
        if z <= 0.0 {
            return Err(Error::InvalidDensity(
                "truncation window carries no normal mass".into(),
            ));
        }
        Ok(Self {
            lower,
            upper,
            mean,
            sd,
            alpha,
            beta,
            z,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    /// `Φ(b) − Φ(a)`, evaluated on whichever tail keeps precision.
    fn standard_mass(a: f64, b: f64) -> f64 {
        if a > 0.0 {
            std_normal_sf(a) - std_normal_sf(b)
        } else {
            std_normal_cdf(b) - std_normal_cdf(a)
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if !(self.lower <= x && x <= self.upper) {
            return 0.0;
        }
        let s = (x - self.mean) / self.sd;
        INV_SQRT_2PI * (-0.5 * s * s).exp() / (self.sd * self.z)
    }

    fn mass(&self, set: &IntervalSet) -> f64 {
        let mut total = 0.0;
        for iv in set.intervals() {
            let lo = iv.lo.max(self.lower);
            let hi = iv.hi.min(self.upper);
            if hi > lo {
                let a = (lo - self.mean) / self.sd;
                let b = (hi - self.mean) / self.sd;
                total += Self::standard_mass(a, b) / self.z;
            }
        }
        total.min(1.0)
    }

    /// Inverse-CDF draw: one uniform per sample.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let s = if self.alpha > 0.0 {
            let q = std_normal_sf(self.alpha) - u * self.z;
            -std_normal_quantile(q)
        } else {
            let p = std_normal_cdf(self.alpha) + u * self.z;
            std_normal_quantile(p)
        };
        let s = s.clamp(self.alpha, self.beta);
        (self.mean + self.sd * s).clamp(self.lower, self.upper)
    }
}

/// Extension point for user-supplied densities.
///
/// The pruning-set mass is not derived from these; the caller supplies it.
pub trait CustomDensity: Send + Sync + fmt::Debug {
    fn pdf(&self, x: f64) -> f64;

    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    fn contains(&self, x: f64) -> bool {
        self.pdf(x) > 0.0
    }

    /// Analytic mass over a set of intervals, when the implementation knows it.
    fn interval_mass(&self, _set: &IntervalSet) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone)]
pub enum Density {
    PiecewiseUniform(PiecewiseUniform),
    TruncatedNormal(TruncatedNormal),
    Custom(Arc<dyn CustomDensity>),
}

impl Density {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        PiecewiseUniform::uniform(lo, hi).map(Self::PiecewiseUniform)
    }

    pub fn piecewise_uniform(edges: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        PiecewiseUniform::new(edges, masses).map(Self::PiecewiseUniform)
    }

    pub fn truncated_normal(lower: f64, upper: f64, mean: f64, sd: f64) -> Result<Self> {
        TruncatedNormal::new(lower, upper, mean, sd).map(Self::TruncatedNormal)
    }

    pub fn custom(density: impl CustomDensity + 'static) -> Self {
        Self::Custom(Arc::new(density))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::PiecewiseUniform(d) => d.pdf(x),
            Self::TruncatedNormal(d) => d.pdf(x),
            Self::Custom(d) => d.pdf(x).max(0.0),
        }
    }

    /// Support membership; agrees with `pdf(x) > 0` for the built-in kinds.
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Self::Custom(d) => d.contains(x),
            _ => self.pdf(x) > 0.0,
        }
    }

    /// Probability of `set` under this density.
    pub fn interval_mass(&self, set: &IntervalSet) -> Result<f64> {
        match self {
            Self::PiecewiseUniform(d) => Ok(d.mass(set)),
            Self::TruncatedNormal(d) => Ok(d.mass(set)),
            Self::Custom(d) => d.interval_mass(set).ok_or_else(|| {
                Error::InvalidInput("custom density has no analytic interval mass".into())
            }),
        }
    }

    /// Smallest closed interval holding the support, for the built-in kinds.
    pub fn support_hull(&self) -> Option<Interval> {
        match self {
            Self::PiecewiseUniform(d) => {
                let first = d.masses.iter().position(|&m| m > 0.0)?;
                let last = d.masses.iter().rposition(|&m| m > 0.0)?;
                Some(Interval {
                    lo: d.edges[first],
                    hi: d.edges[last + 1],
                })
            }
            Self::TruncatedNormal(d) => Some(Interval {
                lo: d.lower,
                hi: d.upper,
            }),
            Self::Custom(_) => None,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::PiecewiseUniform(d) => d.sample(rng),
            Self::TruncatedNormal(d) => d.sample(rng),
            Self::Custom(d) => d.sample(rng),
        }
    }
}

/// A seeded random stream.
///
/// [`RandomStream::derived`] gives an independent ChaCha stream per index
/// under one master seed, so trial `i` sees the same draws however the trials
/// are scheduled.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::derived(seed, 0)
    }

    pub fn derived(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `n` i.i.d. draws from the sampling density.
///
/// `outcomes`, when present, holds one observed value per draw and replaces
/// `h(x)` in every estimator. This carries noisy returns whose conditional
/// mean given `x` is `h(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<f64>>,
}

impl SampleBatch {
    pub fn new(values: Vec<f64>, seed: u64) -> Self {
        Self {
            values,
            seed,
            stream: 0,
            outcomes: None,
        }
    }

    pub fn with_outcomes(mut self, outcomes: Vec<f64>) -> Result<Self> {
        if outcomes.len() != self.values.len() {
            return Err(Error::OutcomeLengthMismatch {
                values: self.values.len(),
                outcomes: outcomes.len(),
            });
        }
        self.outcomes = Some(outcomes);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks every value against the support of `g`.
    pub fn validate_support(&self, sampling: &Density) -> Result<()> {
        match self.values.iter().find(|&&x| !sampling.contains(x)) {
            Some(&x) => Err(Error::ImpossibleSample { x }),
            None => Ok(()),
        }
    }
}

/// Draws `count` i.i.d. values from `density`, consuming `stream`.
pub fn draw(density: &Density, stream: &mut RandomStream, count: usize) -> SampleBatch {
    let values = (0..count).map(|_| density.sample(stream)).collect();
    SampleBatch {
        values,
        seed: stream.seed(),
        stream: stream.stream(),
        outcomes: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Composite Simpson on [a, b]; oracle for the truncated-normal normalizer.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn uniform_pdf_values() {
        let g = Density::uniform(0.0, 2.0).unwrap();
        assert_eq!(g.pdf(1.0), 0.5);
        let u = Density::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.pdf(1.5), 0.0);
        assert!(u.contains(1.0) && u.contains(0.0));
        assert!(!u.contains(1.0 + 1e-15));
    }

    #[test]
    fn truncated_normal_pdf_matches_quadrature() {
        let (lo, hi, mu, sd) = (10.375, 11.0, 11.0, 0.625);
        let unnormalized = |x: f64| (-0.5 * ((x - mu) / sd).powi(2)).exp();
        let z = simpson(unnormalized, lo, hi, 20_000);
        let expected = unnormalized(11.0) / z;
        let d = Density::truncated_normal(lo, hi, mu, sd).unwrap();
        assert_relative_eq!(d.pdf(11.0), expected, max_relative = 1e-10);
        assert_eq!(d.pdf(10.0), 0.0);
        assert!(d.contains(lo));
    }

    #[test]
    fn full_support_mass_is_one() {
        let densities = [
            Density::uniform(0.0, 2.0).unwrap(),
            Density::piecewise_uniform(vec![0.0, 1.0, 1.5, 4.0], vec![0.2, 0.0, 0.8]).unwrap(),
            Density::truncated_normal(8.5, 11.0, 11.0, 2.5).unwrap(),
            Density::truncated_normal(3.0, 9.0, 0.0, 1.0).unwrap(),
        ];
        for d in &densities {
            let hull = d.support_hull().unwrap();
            let set = IntervalSet::single(hull.lo, hull.hi).unwrap();
            assert!((d.interval_mass(&set).unwrap() - 1.0).abs() <= 1e-12, "{d:?}");
        }
    }

    #[test]
    fn interval_mass_examples() {
        let g = Density::uniform(0.0, 2.0).unwrap();
        assert_eq!(g.interval_mass(&IntervalSet::single(0.0, 1.0).unwrap()).unwrap(), 0.5);
        assert_eq!(g.interval_mass(&IntervalSet::single(0.0, 2.0).unwrap()).unwrap(), 1.0);
        let cr = Density::uniform(8.5, 11.0).unwrap();
        let c = cr
            .interval_mass(&IntervalSet::single(10.375, 11.0).unwrap())
            .unwrap();
        assert!((c - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn interval_mass_is_additive() {
        let d = Density::truncated_normal(-1.0, 3.0, 0.5, 1.3).unwrap();
        let whole = d.interval_mass(&IntervalSet::single(-0.5, 2.0).unwrap()).unwrap();
        let left = d.interval_mass(&IntervalSet::single(-0.5, 0.7).unwrap()).unwrap();
        let right = d.interval_mass(&IntervalSet::single(0.7, 2.0).unwrap()).unwrap();
        let both = d
            .interval_mass(&IntervalSet::from_pairs(&[(-0.5, 0.7), (0.7, 2.0)]).unwrap())
            .unwrap();
        assert!((whole - left - right).abs() <= 1e-12);
        assert!((whole - both).abs() <= 1e-12);
    }

    #[test]
    fn overlapping_intervals_rejected() {
        assert!(matches!(
            IntervalSet::from_pairs(&[(0.0, 1.0), (0.5, 2.0)]),
            Err(Error::OverlappingIntervals(..))
        ));
        assert!(IntervalSet::from_pairs(&[(0.0, 1.0), (1.0, 2.0)]).is_ok());
        assert!(Interval::new(1.0, 0.0).is_err());
    }

    #[test]
    fn draws_stay_in_support_and_repeat() {
        let g = Density::uniform(0.0, 2.0).unwrap();
        let a = draw(&g, &mut RandomStream::new(11), 1000);
        let b = draw(&g, &mut RandomStream::new(11), 1000);
        assert!(a.values.iter().all(|&x| (0.0..=2.0).contains(&x)));
        assert_eq!(a, b);
        let other = draw(&g, &mut RandomStream::derived(11, 1), 1000);
        assert_ne!(a.values, other.values);
    }

    #[test]
    fn uniform_mean_within_three_standard_errors() {
        let g = Density::uniform(0.0, 2.0).unwrap();
        let n = 1_000_000;
        let batch = draw(&g, &mut RandomStream::new(3), n);
        let mean = batch.values.iter().sum::<f64>() / n as f64;
        let se = (2.0 / 12f64.sqrt()) / 1e3;
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn truncated_normal_draws_match_cdf() {
        let d = Density::truncated_normal(10.375, 11.0, 11.0, 0.625).unwrap();
        let n = 200_000;
        let batch = draw(&d, &mut RandomStream::new(5), n);
        assert!(batch.values.iter().all(|&x| d.contains(x)));
        let split = IntervalSet::single(10.375, 10.7).unwrap();
        let p = d.interval_mass(&split).unwrap();
        let hits = batch.values.iter().filter(|&&x| x <= 10.7).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits - p).abs() <= 4.0 * se, "{hits} vs {p}");
    }

    #[test]
    fn upper_tail_truncation_is_accurate() {
        // Window far in the upper tail exercises the survival-function branch.
        let d = Density::truncated_normal(6.0, 7.0, 0.0, 1.0).unwrap();
        let set = IntervalSet::single(6.0, 7.0).unwrap();
        assert!((d.interval_mass(&set).unwrap() - 1.0).abs() <= 1e-12);
        let batch = draw(&d, &mut RandomStream::new(1), 1000);
        assert!(batch.values.iter().all(|&x| (6.0..=7.0).contains(&x)));
    }

    #[test]
    fn piecewise_gap_is_outside_support() {
        let d = Density::piecewise_uniform(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(d.pdf(1.5), 0.0);
        assert!(d.contains(1.0) && d.contains(2.0));
        let batch = draw(&d, &mut RandomStream::new(2), 5000);
        assert!(batch.values.iter().all(|&x| d.contains(x)));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Density::piecewise_uniform(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(Density::piecewise_uniform(vec![1.0, 0.0], vec![1.0]).is_err());
        assert!(Density::truncated_normal(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Density::truncated_normal(0.0, 1.0, 0.0, 0.0).is_err());
    }
}
