//! Closed-form means and variances of IS and US, with the a-priori predictor.
//!
//! `cargo run --example moment_table`

use unequal_support::prelude::*;

fn main() -> Result<()> {
    let params = illustrative_params(0.5)?;
    let inputs = MomentInputs::new(50, params.c, params.v, 10.0)?;
    println!("n = 50, c = {}, v = {}, theta = 10", params.c, params.v);
    println!("rho = {:.17}, E[1/k | k > 0] = {:.6}", rho(50, params.c), binom_inv_moment(50, params.c));
    println!("{:<4} {:<14} {:>12} {:>12} {:>12}", "", "regime", "mean", "variance", "mse");
    for (name, estimator) in [("IS", Estimator::Is), ("US", Estimator::Us)] {
        for (label, regime) in [("unconditional", Regime::Unconditional), ("k > 0", Regime::Positive)] {
            let r = moment_report(estimator, regime, &inputs)?;
            println!(
                "{name:<4} {label:<14} {:>12.6} {:>12.6} {:>12.6}",
                r.mean,
                r.variance.unwrap_or(f64::NAN),
                r.mse.unwrap_or(f64::NAN)
            );
        }
    }

    println!("\nk = kappa, mean of IS:");
    for kappa in [5, 10, 12, 15, 20] {
        let r = moment_report(Estimator::Is, Regime::Exact, &inputs.with_kappa(kappa)?)?;
        println!("  kappa = {kappa:>2}: {:.4} (bias {:+.4})", r.mean, r.bias);
    }

    println!("\nUS beats IS given k > 0, for any v, at theta = 0?");
    print!("{:>6}", "n\\c");
    let cs = [0.05, 0.1, 0.25, 0.5, 0.75, 1.0];
    for c in cs {
        print!("{c:>6}");
    }
    println!();
    for n in [1u64, 2, 5, 10, 20, 50, 100] {
        print!("{n:>6}");
        for c in cs {
            print!("{:>6}", if us_beats_is(n, c) { "yes" } else { "no" });
        }
        println!();
    }
    Ok(())
}
