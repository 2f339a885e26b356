//! IS, US and WIS on single batches from the illustrative problem.
//!
//! `cargo run --example illustrative_estimates`

use unequal_support::estimators::estimate_all;
use unequal_support::prelude::*;

fn main() -> Result<()> {
    let (f_max, theta) = (0.5, 10.0);
    let problem = illustrative_problem(f_max, theta)?;
    println!("f = U[0, {f_max}], g = U[0, 2], theta = {theta}, c = {}", problem.c());
    println!("{:>5} {:>4} {:>10} {:>10} {:>10}", "batch", "k", "IS", "US", "WIS");

    let mut stream = RandomStream::new(2024);
    for i in 0..8 {
        let batch = draw(&problem.sampling, &mut stream, 20);
        let e = estimate_all(&problem, &batch, ControlVariate::NONE)?;
        let us = if e.us.defined { format!("{:10.4}", e.us.value) } else { format!("{:>10}", "-") };
        println!("{i:>5} {:>4} {:10.4} {us} {:10.4}", e.is.k, e.is.value, e.wis.value);
    }

    // A constant control variate near theta removes most of the IS spread.
    let cv = ControlVariate::new(theta)?;
    let batch = draw(&problem.sampling, &mut stream, 20);
    let plain = is_estimate(&problem, &batch, ControlVariate::NONE)?;
    let shifted = is_estimate(&problem, &batch, cv)?;
    println!("\nsame batch, IS without / with t = {theta}: {:.4} / {:.4}", plain.value, shifted.value);
    Ok(())
}
