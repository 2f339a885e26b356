//! Plugging in a user-supplied sampling density.
//!
//! `cargo run --example custom_density`

use rand::RngCore;
use unequal_support::densities::CustomDensity;
use unequal_support::prelude::*;

/// Triangular density on [0, 2] with its peak at 0.
#[derive(Debug)]
struct Triangle;

impl CustomDensity for Triangle {
    fn pdf(&self, x: f64) -> f64 {
        if (0.0..=2.0).contains(&x) {
            1.0 - x / 2.0
        } else {
            0.0
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        2.0 * (1.0 - (1.0 - u).sqrt())
    }

    fn interval_mass(&self, set: &IntervalSet) -> Option<f64> {
        let cdf = |x: f64| {
            let x = x.clamp(0.0, 2.0);
            x - x * x / 4.0
        };
        Some(set.intervals().iter().map(|iv| cdf(iv.hi) - cdf(iv.lo)).sum())
    }
}

fn main() -> Result<()> {
    let g = Density::custom(Triangle);
    let target = Density::uniform(0.0, 1.0)?;
    // h = x² on [0, 1], so theta = 1/3.
    let h = EvaluationFunction::custom(|x| x * x, IntervalSet::single(0.0, 1.0)?, 0.0, 1.0)?;
    let pruning = PruningSet::from_intervals(IntervalSet::single(0.0, 1.0)?, &g)?;
    let problem = EstimationProblem::new(target, g, h, pruning);
    println!("c = {}", problem.c());

    let mut stream = RandomStream::new(11);
    for n in [10, 100, 1_000, 10_000] {
        let batch = draw(&problem.sampling, &mut stream, n);
        problem.spot_check(&batch)?;
        let is = is_estimate(&problem, &batch, ControlVariate::NONE)?;
        let us = us_estimate(&problem, &batch, ControlVariate::NONE)?;
        let wis = wis_estimate(&problem, &batch)?;
        println!("n = {n:>6}: IS {:.4}  US {:.4}  WIS {:.4}  (theta = 0.3333)", is.value, us.value, wis.value);
    }
    Ok(())
}
