//! Hoeffding intervals from one batch, then their average over many.
//!
//! `cargo run --release --example hoeffding_bounds`

use unequal_support::bounds::weighted_range;
use unequal_support::experiments::{sweep_bounds, BoundSweep};
use unequal_support::prelude::*;

fn main() -> Result<()> {
    let problem = illustrative_problem(0.5, 1.0)?;
    let b = weighted_range(&problem)?;
    let c = problem.c();
    let n = 40;
    let batch = draw(&problem.sampling, &mut RandomStream::new(3), n);
    let is = is_estimate(&problem, &batch, ControlVariate::NONE)?;
    let us = us_estimate(&problem, &batch, ControlVariate::NONE)?;

    println!("b = {b}, c = {c}, n = {n}, k = {}", us.k);
    for (method, est) in [(BoundMethod::IsHoeffding, is), (BoundMethod::UsHoeffding, us)] {
        let (lo, hi) = hoeffding_interval(method, est, b, c, n, 0.1)?;
        let (h_lo, h_hi) = problem.evaluation.bounds_on(0.0, 0.5);
        let lo_t = truncate_bound(lo, h_lo, h_hi);
        let hi_t = truncate_bound(hi, h_lo, h_hi);
        println!(
            "{method:?}: estimate {:.3}, 90% interval [{:.3}, {:.3}], truncated [{:.3}, {:.3}]",
            est.value, lo.value, hi.value, lo_t.value, hi_t.value
        );
    }

    let rows = sweep_bounds(&BoundSweep {
        f_max: 0.5,
        theta: 1.0,
        n_grid: vec![5, 10, 20, 50, 100, 200],
        delta: 0.1,
        split_delta: true,
        trials: 20_000,
        seed: 1,
    })?;
    println!("\n{:>5} {:>18} {:>18} {:>8} {:>8}", "n", "IS mean interval", "US mean interval", "rho", "rho_hat");
    for r in rows {
        println!(
            "{:>5} [{:>7.2}, {:>6.2}] [{:>7.2}, {:>6.2}] {:>8.4} {:>8.4}",
            r.n,
            r.is_lower_mean,
            r.is_upper_mean,
            r.us_lower_mean.unwrap_or(f64::NAN),
            r.us_upper_mean.unwrap_or(f64::NAN),
            r.rho_analytic,
            r.rho_empirical
        );
    }
    Ok(())
}
