//! Importance sampling when the target and sampling distributions have
//! different supports.
//!
//! The crate estimates `θ = E_f[h(X)]` from i.i.d. draws of a sampling
//! density `g` using three estimators:
//!
//! - **IS**, ordinary importance sampling with an optional constant control
//!   variate;
//! - **US**, importance sampling restricted to a pruning set `C` with known
//!   mass `c = ∫_C g`, rescaled by `c / k` where `k` counts the draws in `C`;
//! - **WIS**, the self-normalized (weighted) estimator, as a comparator.
//!
//! Around the estimators sit closed-form means and variances of IS and US
//! under three conditioning regimes ([`moments`]), Hoeffding confidence
//! bounds ([`bounds`]) and a seeded, parallel Monte Carlo harness that checks
//! the closed forms empirically ([`experiments`]).
//!
//! ```
//! use unequal_support::prelude::*;
//!
//! let problem = illustrative_problem(1.0, 0.0).unwrap();
//! let mut stream = RandomStream::new(7);
//! let batch = draw(&problem.sampling, &mut stream, 50);
//! let us = us_estimate(&problem, &batch, ControlVariate::NONE).unwrap();
//! let is = is_estimate(&problem, &batch, ControlVariate::NONE).unwrap();
//! assert!(us.defined);
//! assert_eq!(us.k, is.k);
//! ```

pub mod bounds;
pub mod config;
pub mod densities;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod moments;
pub mod problem;
mod sum;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bounds::{
        hoeffding_interval, hoeffding_is, hoeffding_us, truncate_bound, BoundMethod,
        BoundRequest, BoundResult, Side,
    };
    pub use crate::densities::{draw, Density, Interval, IntervalSet, RandomStream, SampleBatch};
    pub use crate::estimators::{
        count_in_c, importance_weight, is_estimate, us_estimate, us_estimate_empirical_c,
        wis_estimate, ControlVariate, EstimateResult,
    };
    pub use crate::moments::{
        binom_inv_moment, illustrative_params, moment_report, property3_margin, rho, us_beats_is,
        Estimator, MomentInputs, MomentReport, Regime,
    };
    pub use crate::problem::{
        illustrative_problem, EstimationProblem, EvaluationFunction, PruningSet,
    };
    pub use crate::{Error, Result};
}
