use unequal_support::experiments::{
    coverage_study, emit, render, run_trials, sweep_bounds, sweep_illustrative,
    within_standard_errors, BoundRow, BoundSweep, CoverageRow, Format, IllustrativeSweep,
    SweepRow,
};
use unequal_support::prelude::*;

#[test]
fn headline_mse_reproduced_by_simulation() {
    let p = illustrative_problem(0.5, 10.0).unwrap();
    let stats = run_trials(&p, 50, 200_000, 10.0, ControlVariate::NONE, 11).unwrap();
    let is = &stats.is.all;
    let us = &stats.us.all;
    assert!(within_standard_errors(is.mse, 6.08, is.mse_se, 3.0), "{is:?}");
    assert!(within_standard_errors(us.mse, 0.086, us.mse_se, 3.0), "{us:?}");
}

#[test]
fn undefined_rate_tracks_rho() {
    let cfg = IllustrativeSweep {
        f_max_grid: vec![0.2, 0.5],
        theta_grid: vec![1.0],
        n_grid: vec![2, 5],
        trials: 50_000,
        seed: 21,
    };
    for row in sweep_illustrative(&cfg).unwrap() {
        let p = 1.0 - rho(row.n as u64, row.c);
        let se = (p * (1.0 - p) / 50_000.0).sqrt();
        let rate = row.empirical.us.undefined_rate;
        assert!((rate - p).abs() <= 3.0 * se, "{rate} vs {p}");
        assert!(row.empirical.us.positive.unwrap().count == 50_000 - (rate * 50_000.0).round() as usize);
    }
}

#[test]
fn us_intervals_narrower_at_quarter_mass() {
    let cfg = BoundSweep {
        f_max: 0.5,
        theta: 1.0,
        n_grid: vec![5, 10, 20, 50, 100, 200],
        delta: 0.1,
        split_delta: true,
        trials: 5_000,
        seed: 4,
    };
    for row in sweep_bounds(&cfg).unwrap() {
        assert_eq!(row.c, 0.25);
        let is_width = row.is_upper_mean - row.is_lower_mean;
        let us_width = row.us_upper_mean.unwrap() - row.us_lower_mean.unwrap();
        assert!(us_width < is_width, "n = {}: {us_width} vs {is_width}", row.n);
    }
}

#[test]
fn emitted_bytes_are_deterministic_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = IllustrativeSweep {
        f_max_grid: vec![0.5, 2.0],
        theta_grid: vec![0.0, 10.0],
        n_grid: vec![3],
        trials: 300,
        seed: 2,
    };
    let rows = sweep_illustrative(&sweep).unwrap();
    for format in [Format::Csv, Format::Json] {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        emit(&rows, format, &a).unwrap();
        emit(&rows, format, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
    let json = render(&rows, Format::Json).unwrap();
    let back: Vec<SweepRow> = serde_json::from_slice(&json).unwrap();
    assert_eq!(back, rows);

    let bounds = sweep_bounds(&BoundSweep {
        f_max: 1.0,
        theta: 0.0,
        n_grid: vec![1, 4],
        delta: 0.2,
        split_delta: false,
        trials: 200,
        seed: 3,
    })
    .unwrap();
    let back: Vec<BoundRow> = serde_json::from_slice(&render(&bounds, Format::Json).unwrap()).unwrap();
    assert_eq!(back, bounds);

    let coverage = coverage_study(1.0, 1.0, &[1, 10], 0.1, 300, 5).unwrap();
    let back: Vec<CoverageRow> =
        serde_json::from_slice(&render(&coverage, Format::Json).unwrap()).unwrap();
    assert_eq!(back, coverage);
}

#[test]
fn csv_floats_round_trip() {
    let rows = sweep_illustrative(&IllustrativeSweep {
        f_max_grid: vec![0.3],
        theta_grid: vec![0.1],
        n_grid: vec![7],
        trials: 100,
        seed: 0,
    })
    .unwrap();
    let text = String::from_utf8(render(&rows, Format::Csv).unwrap()).unwrap();
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[0].parse::<f64>().unwrap(), 0.3);
    assert_eq!(fields[1].parse::<f64>().unwrap(), 0.1);
    assert_eq!(fields[4].parse::<f64>().unwrap(), rows[0].v);
    assert_eq!(fields[10].parse::<f64>().unwrap(), rows[0].empirical.is.all.mean);
}

#[test]
fn emit_rejects_empty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<SweepRow> = Vec::new();
    assert!(emit(&rows, Format::Csv, &dir.path().join("x.csv")).is_err());
}
