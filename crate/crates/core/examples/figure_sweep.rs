//! Analytic and empirical variances across f_max, written as CSV.
//!
//! `cargo run --release --example figure_sweep -- [out.csv]`

use std::path::PathBuf;

use unequal_support::experiments::{emit, sweep_illustrative, Format, IllustrativeSweep, DEFAULT_F_MAX_GRID};

fn main() -> unequal_support::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let sweep = IllustrativeSweep {
        f_max_grid: DEFAULT_F_MAX_GRID.to_vec(),
        theta_grid: vec![0.0, 10.0],
        n_grid: vec![10],
        trials: 20_000,
        seed: 7,
    };
    let rows = sweep_illustrative(&sweep)?;
    println!("{:>6} {:>6} {:>12} {:>12} {:>12} {:>12}", "theta", "f_max", "IS var", "IS emp", "US var", "US emp");
    for r in &rows {
        println!(
            "{:>6} {:>6.1} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            r.theta,
            r.coordinate,
            r.analytic.is_unconditional.variance.unwrap(),
            r.empirical.is.all.variance,
            r.analytic.us_unconditional.variance.unwrap(),
            r.empirical.us.all.variance,
        );
    }
    if let Some(path) = out {
        emit(&rows, Format::Csv, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
