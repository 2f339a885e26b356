//! Evaluation functions, pruning sets and the estimation problem that ties
//! them to a target and a sampling density.

use std::fmt;
use std::sync::Arc;

use crate::densities::{Density, IntervalSet, SampleBatch};
use crate::error::{Error, Result};

/// Tolerance for a declared pruning mass against its analytic value.
pub const MASS_TOLERANCE: f64 = 1e-12;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Predicate = Arc<dyn Fn(f64) -> bool + Send + Sync>;

/// The function `h` whose expectation under the target is estimated.
#[derive(Clone)]
pub enum EvaluationFunction {
    /// `values[i]` on `[edges[i], edges[i+1])`, the last cell closed on the
    /// right, and 0 outside `[edges[0], edges[last]]`.
    PiecewiseConstant { edges: Vec<f64>, values: Vec<f64> },
    /// An arbitrary map, forced to 0 outside `support`, with declared bounds.
    Custom {
        func: RealFn,
        support: IntervalSet,
        h_min: f64,
        h_max: f64,
    },
}

impl fmt::Debug for EvaluationFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PiecewiseConstant { edges, values } => f
                .debug_struct("PiecewiseConstant")
                .field("edges", edges)
                .field("values", values)
                .finish(),
            Self::Custom {
                support,
                h_min,
                h_max,
                ..
            } => f
                .debug_struct("Custom")
                .field("support", support)
                .field("h_min", h_min)
                .field("h_max", h_max)
                .finish_non_exhaustive(),
        }
    }
}

impl EvaluationFunction {
    pub fn piecewise_constant(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || values.len() != edges.len() - 1 {
            return Err(Error::InvalidInput(format!(
                "piecewise-constant h needs n+1 edges for n values, got {} and {}",
                edges.len(),
                values.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "h edges must be finite and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("h values must be finite".into()));
        }
        Ok(Self::PiecewiseConstant { edges, values })
    }

    /// Constant `value` on `[lo, hi]`, zero elsewhere.
    pub fn indicator(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::piecewise_constant(vec![lo, hi], vec![value])
    }

    pub fn custom(
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: IntervalSet,
        h_min: f64,
        h_max: f64,
    ) -> Result<Self> {
        if h_min.is_nan() || h_max.is_nan() || h_min > h_max {
            return Err(Error::InvalidInput(format!(
                "h range [{h_min}, {h_max}] is empty"
            )));
        }
        Ok(Self::Custom {
            func: Arc::new(func),
            support,
            h_min,
            h_max,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::PiecewiseConstant { edges, values } => {
                let last = edges.len() - 1;
                if x < edges[0] || x > edges[last] {
                    return 0.0;
                }
                let i = edges.partition_point(|&e| e <= x).saturating_sub(1);
                values[i.min(values.len() - 1)]
            }
            Self::Custom { func, support, .. } => {
                if support.contains(x) {
                    func(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Declared `[h_min, h_max]`; always contains 0 for the piecewise kind.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Self::PiecewiseConstant { values, .. } => values
                .iter()
                .fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v))),
            Self::Custom { h_min, h_max, .. } => (*h_min, *h_max),
        }
    }

    /// Bounds of `h` over `[lo, hi]`: exact for piecewise-constant `h`, the
    /// declared range otherwise.
    pub fn bounds_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Self::PiecewiseConstant { edges, values } => {
                let last = edges.len() - 1;
                let mut out: Option<(f64, f64)> = None;
                let mut push = |v: f64| {
                    out = Some(match out {
                        None => (v, v),
                        Some((a, b)) => (a.min(v), b.max(v)),
                    });
                };
                if lo < edges[0] || hi > edges[last] {
                    push(0.0);
                }
                for (i, &v) in values.iter().enumerate() {
                    let (a, b) = (edges[i], edges[i + 1]);
                    let right_closed = i + 1 == values.len();
                    let hits = a <= hi && (lo < b || (right_closed && lo <= b));
                    if hits {
                        push(v);
                    }
                }
                out.unwrap_or((0.0, 0.0))
            }
            Self::Custom { .. } => self.range(),
        }
    }

    /// Breakpoints where `h` may change value, when known.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::PiecewiseConstant { edges, .. } => edges.clone(),
            Self::Custom { support, .. } => support
                .intervals()
                .iter()
                .flat_map(|iv| [iv.lo, iv.hi])
                .collect(),
        }
    }
}

#[derive(Clone)]
enum Region {
    Intervals(IntervalSet),
    Predicate(Predicate),
}

/// The set `C` of draws kept by US, together with its mass `c = ∫_C g`.
#[derive(Clone)]
pub struct PruningSet {
    region: Region,
    mass: f64,
}

impl fmt::Debug for PruningSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("PruningSet");
        match &self.region {
            Region::Intervals(set) => s.field("intervals", set),
            Region::Predicate(_) => s.field("predicate", &"<fn>"),
        };
        s.field("mass", &self.mass).finish()
    }
}

fn check_mass(c: f64) -> Result<f64> {
    if c > 0.0 && c <= 1.0 {
        Ok(c)
    } else {
        Err(Error::InvalidMass(c))
    }
}

impl PruningSet {
    /// Interval-described `C`; `c` is integrated analytically from `g`.
    pub fn from_intervals(set: IntervalSet, sampling: &Density) -> Result<Self> {
        let mass = check_mass(sampling.interval_mass(&set)?)?;
        Ok(Self {
            region: Region::Intervals(set),
            mass,
        })
    }

    /// Interval-described `C` with a caller-declared `c`. When `g` has an
    /// analytic mass the declaration must agree with it.
    pub fn with_declared_mass(set: IntervalSet, c: f64, sampling: &Density) -> Result<Self> {
        let c = check_mass(c)?;
        if let Ok(analytic) = sampling.interval_mass(&set) {
            if (analytic - c).abs() > MASS_TOLERANCE {
                return Err(Error::MassMismatch {
                    declared: c,
                    analytic,
                });
            }
        }
        Ok(Self {
            region: Region::Intervals(set),
            mass: c,
        })
    }

    /// Arbitrary indicator with a trusted mass.
    pub fn from_predicate(
        predicate: impl Fn(f64) -> bool + Send + Sync + 'static,
        c: f64,
    ) -> Result<Self> {
        Ok(Self {
            region: Region::Predicate(Arc::new(predicate)),
            mass: check_mass(c)?,
        })
    }

    /// `C = G`, so `c = 1`.
    pub fn whole_support(sampling: &Density) -> Self {
        let g = sampling.clone();
        Self {
            region: Region::Predicate(Arc::new(move |x| g.contains(x))),
            mass: 1.0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match &self.region {
            Region::Intervals(set) => set.contains(x),
            Region::Predicate(p) => p(x),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn intervals(&self) -> Option<&IntervalSet> {
        match &self.region {
            Region::Intervals(set) => Some(set),
            Region::Predicate(_) => None,
        }
    }
}

/// Target `f`, sampling `g`, evaluation `h` and pruning set `C`.
///
/// The library assumes `F ∩ H ⊆ C ⊆ G` and checks it on every sample it
/// sees; see [`EstimationProblem::spot_check`].
#[derive(Debug, Clone)]
pub struct EstimationProblem {
    pub target: Density,
    pub sampling: Density,
    pub evaluation: EvaluationFunction,
    pub pruning: PruningSet,
}

impl EstimationProblem {
    pub fn new(
        target: Density,
        sampling: Density,
        evaluation: EvaluationFunction,
        pruning: PruningSet,
    ) -> Self {
        Self {
            target,
            sampling,
            evaluation,
            pruning,
        }
    }

    pub fn c(&self) -> f64 {
        self.pruning.mass()
    }

    /// Flags the first sample with `f(x)h(x) != 0` that lies outside `C`.
    pub fn spot_check(&self, batch: &SampleBatch) -> Result<()> {
        for (i, &x) in batch.values.iter().enumerate() {
            let y = match &batch.outcomes {
                Some(o) => o[i],
                None => self.evaluation.eval(x),
            };
            if self.target.pdf(x) * y != 0.0 && !self.pruning.contains(x) {
                return Err(Error::SupportViolation { x });
            }
        }
        Ok(())
    }
}

/// The scaled illustrative family: `g = U[0, 2]`, `f = U[0, f_max]`,
/// `h = θ − 1` below `f_max / 2` and `θ + 1` from there up to 2, `C = F`.
///
/// `θ = E_f[h]`, `c = f_max / 2` and `v = 4 / f_max²`.
pub fn illustrative_problem(f_max: f64, theta: f64) -> Result<EstimationProblem> {
    if !(f_max > 0.0 && f_max <= 2.0) {
        return Err(Error::InvalidInput(format!("f_max must lie in (0, 2], got {f_max}")));
    }
    let target = Density::uniform(0.0, f_max)?;
    let sampling = Density::uniform(0.0, 2.0)?;
    let evaluation =
        EvaluationFunction::piecewise_constant(vec![0.0, f_max / 2.0, 2.0], vec![theta - 1.0, theta + 1.0])?;
    let pruning = PruningSet::from_intervals(IntervalSet::single(0.0, f_max)?, &sampling)?;
    Ok(EstimationProblem::new(target, sampling, evaluation, pruning))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_constant_eval() {
        let h = EvaluationFunction::piecewise_constant(vec![0.0, 0.5, 2.0], vec![-1.0, 1.0]).unwrap();
        assert_eq!(h.eval(-0.1), 0.0);
        assert_eq!(h.eval(0.0), -1.0);
        assert_eq!(h.eval(0.4999), -1.0);
        assert_eq!(h.eval(0.5), 1.0);
        assert_eq!(h.eval(2.0), 1.0);
        assert_eq!(h.eval(2.1), 0.0);
        assert_eq!(h.range(), (-1.0, 1.0));
        assert_eq!(h.bounds_on(0.0, 0.3), (-1.0, -1.0));
        assert_eq!(h.bounds_on(0.3, 1.0), (-1.0, 1.0));
        assert_eq!(h.bounds_on(2.0, 3.0), (0.0, 1.0));
    }

    #[test]
    fn custom_h_is_zero_off_support() {
        let h = EvaluationFunction::custom(|x| x * x, IntervalSet::single(0.0, 1.0).unwrap(), 0.0, 1.0)
            .unwrap();
        assert_eq!(h.eval(0.5), 0.25);
        assert_eq!(h.eval(1.5), 0.0);
    }

    #[test]
    fn pruning_mass_from_intervals() {
        let g = Density::uniform(0.0, 2.0).unwrap();
        let c = PruningSet::from_intervals(IntervalSet::single(0.0, 1.0).unwrap(), &g).unwrap();
        assert!((c.mass() - 0.5).abs() <= MASS_TOLERANCE);
        assert!(c.contains(1.0) && !c.contains(1.5));
    }

    #[test]
    fn declared_mass_must_match() {
        let g = Density::uniform(0.0, 2.0).unwrap();
        let set = IntervalSet::single(0.0, 1.0).unwrap();
        assert!(PruningSet::with_declared_mass(set.clone(), 0.5, &g).is_ok());
        assert!(matches!(
            PruningSet::with_declared_mass(set, 0.4, &g),
            Err(Error::MassMismatch { .. })
        ));
    }

    #[test]
    fn mass_out_of_range_rejected() {
        assert!(matches!(PruningSet::from_predicate(|_| true, 0.0), Err(Error::InvalidMass(_))));
        assert!(matches!(PruningSet::from_predicate(|_| true, 1.5), Err(Error::InvalidMass(_))));
        let g = Density::uniform(0.0, 2.0).unwrap();
        assert!(PruningSet::from_intervals(IntervalSet::single(5.0, 6.0).unwrap(), &g).is_err());
    }

    #[test]
    fn spot_check_detects_pruned_support() {
        let mut p = illustrative_problem(1.0, 1.0).unwrap();
        let ok = SampleBatch::new(vec![0.2, 0.7, 1.5], 0);
        assert!(p.spot_check(&ok).is_ok());
        p.pruning = PruningSet::from_intervals(IntervalSet::single(0.0, 0.5).unwrap(), &p.sampling).unwrap();
        assert!(matches!(p.spot_check(&ok), Err(Error::SupportViolation { x }) if x == 0.7));
    }

    #[test]
    fn illustrative_parameters() {
        let p = illustrative_problem(0.5, 10.0).unwrap();
        assert_eq!(p.c(), 0.25);
        assert_eq!(p.evaluation.eval(0.1), 9.0);
        assert_eq!(p.evaluation.eval(0.3), 11.0);
        assert!(illustrative_problem(0.0, 1.0).is_err());
        assert!(illustrative_problem(2.5, 1.0).is_err());
    }
}
