//! TOML run configuration.
//!
//! Every section is optional. A complete file:
//!
//! ```toml
//! [problem]
//! kind = "explicit"            # or "illustrative" / "treatment"
//!
//! [problem.target]
//! kind = "uniform"             # or "piecewise_uniform" / "truncated_normal"
//! lo = 0.0
//! hi = 0.5
//!
//! [problem.sampling]
//! kind = "piecewise_uniform"
//! edges = [0.0, 1.0, 2.0]
//! masses = [0.5, 0.5]          # normalized on load
//!
//! [problem.evaluation]         # piecewise constant h
//! edges = [0.0, 0.25, 2.0]
//! values = [9.0, 11.0]
//!
//! [problem.pruning]
//! intervals = [[0.0, 0.5]]
//! c = 0.25                     # optional; checked against g when given
//!
//! [run]
//! seed = 42
//! trials = 200000
//! n = 50
//! delta = 0.1
//! cv = "none"                  # or "value:<real>" / "sampling-mean"
//!
//! [grids]
//! f_max = [0.2, 0.5, 1.0, 2.0]
//! theta = [0.0, 1.0, 10.0]
//! n = [5, 10, 50]
//! cr_min = [8.5, 10.375]
//! ```
//!
//! The shortcuts are `{ kind = "illustrative", f_max, theta }` and
//! `{ kind = "treatment", cr_min }`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::densities::{Density, IntervalSet};
use crate::error::{Error, Result};
use crate::experiments::{treatment_problem, SyntheticReturnSurface};
use crate::problem::{illustrative_problem, EstimationProblem, EvaluationFunction, PruningSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Uniform { lo: f64, hi: f64 },
    PiecewiseUniform { edges: Vec<f64>, masses: Vec<f64> },
    TruncatedNormal { lower: f64, upper: f64, mean: f64, sd: f64 },
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density> {
        match self {
            Self::Uniform { lo, hi } => Density::uniform(*lo, *hi),
            Self::PiecewiseUniform { edges, masses } => {
                Density::piecewise_uniform(edges.clone(), masses.clone())
            }
            Self::TruncatedNormal {
                lower,
                upper,
                mean,
                sd,
            } => Density::truncated_normal(*lower, *upper, *mean, *sd),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSpec {
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningSpec {
    pub intervals: Vec<(f64, f64)>,
    #[serde(default)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Illustrative {
        f_max: f64,
        theta: f64,
    },
    Treatment {
        cr_min: f64,
    },
    Explicit {
        target: DensitySpec,
        sampling: DensitySpec,
        evaluation: EvaluationSpec,
        pruning: PruningSpec,
    },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<EstimationProblem> {
        match self {
            Self::Illustrative { f_max, theta } => illustrative_problem(*f_max, *theta),
            Self::Treatment { cr_min } => {
                treatment_problem(*cr_min, &SyntheticReturnSurface::default())
            }
            Self::Explicit {
                target,
                sampling,
                evaluation,
                pruning,
            } => {
                let target = target.build()?;
                let sampling = sampling.build()?;
                let h = EvaluationFunction::piecewise_constant(
                    evaluation.edges.clone(),
                    evaluation.values.clone(),
                )?;
                let set = IntervalSet::from_pairs(&pruning.intervals)?;
                let pruning = match pruning.c {
                    Some(c) => PruningSet::with_declared_mass(set, c, &sampling)?,
                    None => PruningSet::from_intervals(set, &sampling)?,
                };
                Ok(EstimationProblem::new(target, sampling, h, pruning))
            }
        }
    }
}

/// Control-variate choice as written on the command line or in a config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CvChoice {
    None,
    Value(f64),
    SamplingMean,
}

impl FromStr for CvChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "sampling-mean" => Ok(Self::SamplingMean),
            _ => {
                let v = s
                    .strip_prefix("value:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "control variate must be none, value:<real> or sampling-mean, got {s:?}"
                        ))
                    })?;
                Ok(Self::Value(v))
            }
        }
    }
}

impl fmt::Display for CvChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            Self::Value(v) => write!(f, "value:{v}"),
            Self::SamplingMean => f.write_str("sampling-mean"),
        }
    }
}

impl Serialize for CvChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CvChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub cv: Option<CvChoice>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub f_max: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub cr_min: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub grids: GridSpec,
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_example_parses() {
        let text = r#"
[problem]
kind = "explicit"

[problem.target]
kind = "uniform"
lo = 0.0
hi = 0.5

[problem.sampling]
kind = "piecewise_uniform"
edges = [0.0, 1.0, 2.0]
masses = [0.5, 0.5]

[problem.evaluation]
edges = [0.0, 0.25, 2.0]
values = [9.0, 11.0]

[problem.pruning]
intervals = [[0.0, 0.5]]
c = 0.25

[run]
seed = 42
cv = "value:1.5"

[grids]
n = [5, 10]
"#;
        let cfg: Config = text.parse().unwrap();
        assert_eq!(cfg.run.seed, Some(42));
        assert_eq!(cfg.run.cv, Some(CvChoice::Value(1.5)));
        assert_eq!(cfg.grids.n, Some(vec![5, 10]));
        let p = cfg.problem.unwrap().build().unwrap();
        assert_eq!(p.c(), 0.25);
        assert_eq!(p.evaluation.eval(0.1), 9.0);
    }

    #[test]
    fn declared_mass_must_match() {
        let spec = ProblemSpec::Explicit {
            target: DensitySpec::Uniform { lo: 0.0, hi: 1.0 },
            sampling: DensitySpec::Uniform { lo: 0.0, hi: 2.0 },
            evaluation: EvaluationSpec {
                edges: vec![0.0, 1.0],
                values: vec![1.0],
            },
            pruning: PruningSpec {
                intervals: vec![(0.0, 1.0)],
                c: Some(0.4),
            },
        };
        assert!(matches!(spec.build(), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn shortcuts() {
        let cfg: Config = "[problem]\nkind = \"illustrative\"\nf_max = 0.5\ntheta = 10.0\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.problem.unwrap().build().unwrap().c(), 0.25);
        let cfg: Config = "problem = { kind = \"treatment\", cr_min = 10.375 }".parse().unwrap();
        assert_eq!(cfg.problem.unwrap().build().unwrap().c(), 0.25);
    }

    #[test]
    fn cv_choice_round_trip() {
        for s in ["none", "sampling-mean", "value:-2.5"] {
            assert_eq!(s.parse::<CvChoice>().unwrap().to_string(), s);
        }
        assert!("value:abc".parse::<CvChoice>().is_err());
        assert!("value:inf".parse::<CvChoice>().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!("[run]\nsed = 1\n".parse::<Config>().is_err());
    }
}
