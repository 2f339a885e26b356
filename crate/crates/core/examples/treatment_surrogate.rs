//! MSE of IS, US and WIS on the synthetic dosing problem, with and without
//! the sampling-mean control variate.
//!
//! `cargo run --release --example treatment_surrogate`

use unequal_support::experiments::{sweep_treatment_surrogate, CvMode, TreatmentSweep};

fn main() -> unequal_support::Result<()> {
    for cv_mode in [CvMode::None, CvMode::SamplingMean] {
        let rows = sweep_treatment_surrogate(&TreatmentSweep {
            cr_min_grid: vec![8.5, 9.5, 10.0, 10.375, 10.75],
            trials: 20_000,
            cv_mode,
            seed: 3,
            ..TreatmentSweep::default()
        })?;
        println!("control variate: {cv_mode:?}");
        println!("{:>7} {:>6} {:>8} {:>11} {:>11} {:>11} {:>9}", "cr_min", "c", "theta", "IS mse", "US mse", "WIS mse", "k=0 rate");
        for r in rows {
            let e = &r.empirical;
            println!(
                "{:>7} {:>6.3} {:>8.5} {:>11.3e} {:>11.3e} {:>11.3e} {:>9.5}",
                r.coordinate, r.c, r.theta, e.is.all.mse, e.us.all.mse, e.wis.all.mse, e.us.undefined_rate
            );
        }
        println!();
    }
    Ok(())
}
