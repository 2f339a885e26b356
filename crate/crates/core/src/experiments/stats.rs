use serde::{Deserialize, Serialize};

use crate::sum::CompensatedSum;

/// Mean, variance and MSE of a sample of estimates, each with its Monte Carlo
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub mean_se: f64,
    /// Unbiased (n − 1) sample variance.
    pub variance: f64,
    pub variance_se: f64,
    /// Mean squared error about the true value.
    pub mse: f64,
    pub mse_se: f64,
}

impl SampleStats {
    /// `None` for an empty sample.
    pub fn from_values(values: &[f64], truth: f64) -> Option<Self> {
        let count = values.len();
        if count == 0 {
            return None;
        }
        let nf = count as f64;
        let mean = values.iter().copied().collect::<CompensatedSum>().value() / nf;

        let mut m2 = CompensatedSum::default();
        let mut m4 = CompensatedSum::default();
        let mut sq_err = CompensatedSum::default();
        for &x in values {
            let d = x - mean;
            let d2 = d * d;
            m2.add(d2);
            m4.add(d2 * d2);
            let e = x - truth;
            sq_err.add(e * e);
        }
        let m2 = m2.value() / nf;
        let m4 = m4.value() / nf;
        let mse = sq_err.value() / nf;
        let variance = if count > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };

        let mut dev = CompensatedSum::default();
        for &x in values {
            let e = (x - truth) * (x - truth) - mse;
            dev.add(e * e);
        }
        let mse_var = if count > 1 { dev.value() / (nf - 1.0) } else { 0.0 };

        Some(Self {
            count,
            mean,
            mean_se: (variance / nf).sqrt(),
            variance,
            variance_se: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
            mse,
            mse_se: (mse_var / nf).sqrt(),
        })
    }
}

/// `|observed − expected| ≤ k·se`.
pub fn within_standard_errors(observed: f64, expected: f64, se: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * se
}
