//! Closed-form means, biases, variances and MSEs of IS and US.
//!
//! Three conditioning regimes are covered: unconditional, conditioned on at
//! least one draw landing in `C` (`k > 0`), and conditioned on exactly `κ`
//! draws landing in `C`. The exact-count regime has a mean only.
//!
//! With a constant control variate `t`, the caller passes `v` for the shifted
//! integrand `w·(h − t)` and the formulas are applied to `θ' = θ − t`, which
//! is valid when `C` covers the whole target support. With `t = 0` they are
//! the plain textbook forms.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Is,
    Us,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No conditioning.
    Unconditional,
    /// Conditioned on `k > 0`.
    Positive,
    /// Conditioned on `k = κ`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentInputs {
    pub n: u64,
    pub c: f64,
    /// `Var_g(w(X)(h(X) − t) | X ∈ C)`.
    pub v: f64,
    pub theta: f64,
    pub kappa: Option<u64>,
    #[serde(default)]
    pub control_variate: f64,
}

impl MomentInputs {
    pub fn new(n: u64, c: f64, v: f64, theta: f64) -> Result<Self> {
        let inputs = Self {
            n,
            c,
            v,
            theta,
            kappa: None,
            control_variate: 0.0,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn with_kappa(mut self, kappa: u64) -> Result<Self> {
        self.kappa = Some(kappa);
        self.validate()?;
        Ok(self)
    }

    pub fn with_control_variate(mut self, t: f64) -> Self {
        self.control_variate = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::InvalidMass(self.c));
        }
        if !self.v.is_finite() || self.v < 0.0 {
            return Err(Error::InvalidInput(format!("v must be finite and >= 0, got {}", self.v)));
        }
        if !self.theta.is_finite() || !self.control_variate.is_finite() {
            return Err(Error::InvalidInput("theta and t must be finite".into()));
        }
        if let Some(k) = self.kappa {
            if k == 0 || k > self.n {
                return Err(Error::InvalidInput(format!(
                    "kappa must lie in [1, n = {}], got {k}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub estimator: Estimator,
    pub regime: Regime,
    pub mean: f64,
    pub bias: f64,
    /// Absent in the exact-count regime.
    pub variance: Option<f64>,
    /// Mean squared error about `θ`; absent when the variance is.
    pub mse: Option<f64>,
}

/// `Pr(k > 0) = 1 − (1 − c)^n`, in the form that stays accurate for small `c`.
pub fn rho(n: u64, c: f64) -> f64 {
    if n == 1 {
        return c;
    }
    if c >= 1.0 {
        return 1.0;
    }
    -(n as f64 * (-c).ln_1p()).exp_m1()
}

/// `E[1/κ | κ > 0]` for `κ ~ B(n, c)`.
///
/// Summed exactly over `κ = 1..n`. Terms are built by ratio from the mode,
/// whose log-probability is computed directly, and accumulated from the
/// largest term outward.
pub fn binom_inv_moment(n: u64, c: f64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    assert!(c > 0.0 && c <= 1.0, "c must lie in (0, 1]");
    if n == 1 {
        return 1.0;
    }
    if c >= 1.0 {
        return 1.0 / n as f64;
    }
    let log_q = (-c).ln_1p();
    let odds = c / (1.0 - c);
    let mode = (((n + 1) as f64 * c).floor() as u64).clamp(1, n);
    let log_pmf_mode = ln_binomial(n, mode) + mode as f64 * c.ln() + (n - mode) as f64 * log_q;

    // Relative to pmf(mode) = 1.
    let mut total = 1.0 / mode as f64;
    let mut term = 1.0;
    for kappa in (1..mode).rev() {
        // pmf(κ) / pmf(κ+1) = (κ+1) / (n−κ) · (1−c)/c
        term *= (kappa + 1) as f64 / (n - kappa) as f64 / odds;
        let contribution = term / kappa as f64;
        total += contribution;
        if contribution < total * 1e-18 {
            break;
        }
    }
    term = 1.0;
    for kappa in mode + 1..=n {
        // pmf(κ) / pmf(κ−1) = (n−κ+1) / κ · c/(1−c)
        term *= (n - kappa + 1) as f64 / kappa as f64 * odds;
        let contribution = term / kappa as f64;
        total += contribution;
        if contribution < total * 1e-18 {
            break;
        }
    }
    let value = log_pmf_mode.exp() * total / rho(n, c);
    value.min(1.0)
}

/// Sufficient a-priori condition for US to have lower variance than IS given
/// `k > 0`: `c² E[1/κ | κ > 0] ≤ c / (nρ)`.
pub fn us_beats_is(n: u64, c: f64) -> bool {
    let (us_factor, is_factor) = variance_factors(n, c);
    us_factor <= is_factor
}

/// The coefficients of `v` in the US and IS variances given `k > 0`.
fn variance_factors(n: u64, c: f64) -> (f64, f64) {
    let r = rho(n, c);
    (c * c * binom_inv_moment(n, c), c / (n as f64 * r))
}

/// `cρ(n−1) + ρ − cn`, the nonnegative coefficient of `θ²` in the IS variance
/// given `k > 0` (after scaling by `cnρ²`).
pub fn property3_margin(n: u64, c: f64) -> f64 {
    let r = rho(n, c);
    let n = n as f64;
    c * r * (n - 1.0) + r - c * n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IllustrativeParams {
    pub c: f64,
    pub v: f64,
}

/// `c` and `v` of the scaled illustrative family; `v` does not depend on `θ`.
pub fn illustrative_params(f_max: f64) -> Result<IllustrativeParams> {
    if !(f_max > 0.0 && f_max <= 2.0) {
        return Err(Error::InvalidInput(format!("f_max must lie in (0, 2], got {f_max}")));
    }
    Ok(IllustrativeParams {
        c: f_max / 2.0,
        v: 4.0 / (f_max * f_max),
    })
}

pub fn moment_report(
    estimator: Estimator,
    regime: Regime,
    inputs: &MomentInputs,
) -> Result<MomentReport> {
    inputs.validate()?;
    let MomentInputs {
        n,
        c,
        v,
        theta,
        kappa,
        control_variate: t,
    } = *inputs;
    match (regime, kappa) {
        (Regime::Exact, None) => return Err(Error::MissingKappa),
        (Regime::Unconditional | Regime::Positive, Some(_)) => return Err(Error::UnexpectedKappa),
        _ => {}
    }
    let shifted = theta - t;
    let r = rho(n, c);
    let nf = n as f64;
    let (us_factor, is_factor) = variance_factors(n, c);

    let (mean, variance) = match (estimator, regime) {
        (Estimator::Is, Regime::Unconditional) => {
            (theta, (c * v + shifted * shifted * (1.0 / c - 1.0)) / nf)
        }
        (Estimator::Is, Regime::Positive) => (
            t + shifted / r,
            v * is_factor
                + shifted * shifted * property3_margin(n, c) / (c * nf * r * r),
        ),
        (Estimator::Is, Regime::Exact) => {
            let kappa = kappa.unwrap_or_default() as f64;
            (t + kappa / (c * nf) * shifted, f64::NAN)
        }
        (Estimator::Us, Regime::Unconditional) => {
            (r * theta, r * (v * us_factor) + theta * theta * r * (1.0 - r))
        }
        (Estimator::Us, Regime::Positive) => (theta, v * us_factor),
        (Estimator::Us, Regime::Exact) => (theta, f64::NAN),
    };
    let bias = mean - theta;
    let variance = (regime != Regime::Exact).then_some(variance);
    Ok(MomentReport {
        estimator,
        regime,
        mean,
        bias,
        variance,
        mse: variance.map(|var| var + bias * bias),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct enumeration oracle: pmf from an iteratively built coefficient.
    fn enumerate_inv_moment(n: u64, c: f64) -> f64 {
        let mut sum = 0.0;
        let mut coeff = 1.0f64;
        let mut no_hit = 0.0;
        for kappa in 0..=n {
            if kappa > 0 {
                coeff *= (n - kappa + 1) as f64 / kappa as f64;
            }
            let p = coeff * c.powi(kappa as i32) * (1.0 - c).powi((n - kappa) as i32);
            if kappa == 0 {
                no_hit = p;
            } else {
                sum += p / kappa as f64;
            }
        }
        sum / (1.0 - no_hit)
    }

    fn binom_pmf(n: u64, c: f64, kappa: u64) -> f64 {
        (ln_binomial(n, kappa) + kappa as f64 * c.ln() + (n - kappa) as f64 * (1.0 - c).ln()).exp()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(7, 1.0), 1.0);
        assert_eq!(rho(1, 0.3), 0.3);
        let naive = 1.0 - 0.75f64.powi(50);
        assert!((rho(50, 0.25) - naive).abs() <= 1e-15);
        // Small c keeps its leading digits.
        let tiny = rho(3, 1e-12);
        assert!((tiny / 3e-12 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_moment_examples() {
        assert_eq!(binom_inv_moment(1, 0.37), 1.0);
        assert!((binom_inv_moment(2, 0.5) - 5.0 / 6.0).abs() <= 1e-15);
        let e = binom_inv_moment(50, 0.25);
        assert!((16.0 * 0.0625 * e - 0.086).abs() < 0.002, "{e}");
        assert_eq!(binom_inv_moment(9, 1.0), 1.0 / 9.0);
    }

    #[test]
    fn inverse_moment_matches_enumeration() {
        for n in [2, 3, 5, 10, 17, 50, 120] {
            for c in [0.003, 0.05, 0.25, 0.5, 0.77, 0.99] {
                let a = binom_inv_moment(n, c);
                let b = enumerate_inv_moment(n, c);
                assert!((a - b).abs() <= 1e-12 * b, "n={n} c={c}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inverse_moment_bounds_and_monotonicity() {
        for c in [0.01, 0.1, 0.3, 0.5, 0.9] {
            let mut prev = f64::INFINITY;
            for n in 1..=300u64 {
                let e = binom_inv_moment(n, c);
                assert!(e <= 1.0 && e >= 1.0 / n as f64, "n={n} c={c}");
                if n > 1 {
                    assert!(e > 1.0 / n as f64);
                }
                assert!(e <= prev + 1e-15, "not monotone at n={n} c={c}");
                prev = e;
            }
        }
        // Large n stays finite and close to 1/(nc).
        let e = binom_inv_moment(10_000, 0.3);
        assert!((e * 3000.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn headline_numbers() {
        let p = illustrative_params(0.5).unwrap();
        assert_eq!((p.c, p.v), (0.25, 16.0));
        let inputs = MomentInputs::new(50, p.c, p.v, 10.0).unwrap();
        let is = moment_report(Estimator::Is, Regime::Unconditional, &inputs).unwrap();
        assert!((is.variance.unwrap() - 6.08).abs() <= 1e-10);
        let us = moment_report(Estimator::Us, Regime::Unconditional, &inputs).unwrap();
        assert!((us.mse.unwrap() - 0.086).abs() <= 0.002);
    }

    #[test]
    fn illustrative_param_examples() {
        let p = illustrative_params(2.0).unwrap();
        assert_eq!((p.c, p.v), (1.0, 1.0));
        let p = illustrative_params(1.0).unwrap();
        assert_eq!((p.c, p.v), (0.5, 4.0));
        assert!(illustrative_params(0.0).is_err());
        assert!(illustrative_params(2.01).is_err());
    }

    #[test]
    fn regime_kappa_pairing() {
        let inputs = MomentInputs::new(10, 0.3, 1.0, 2.0).unwrap();
        assert!(matches!(
            moment_report(Estimator::Is, Regime::Exact, &inputs),
            Err(Error::MissingKappa)
        ));
        let with_k = inputs.with_kappa(3).unwrap();
        assert!(matches!(
            moment_report(Estimator::Us, Regime::Positive, &with_k),
            Err(Error::UnexpectedKappa)
        ));
        assert!(inputs.with_kappa(0).is_err());
        assert!(inputs.with_kappa(11).is_err());
        assert!(MomentInputs::new(0, 0.3, 1.0, 0.0).is_err());
        assert!(MomentInputs::new(3, 0.0, 1.0, 0.0).is_err());
        assert!(MomentInputs::new(3, 0.5, -1.0, 0.0).is_err());
    }

    #[test]
    fn exact_regime_has_no_variance() {
        let inputs = MomentInputs::new(20, 0.25, 3.0, 4.0).unwrap().with_kappa(5).unwrap();
        let is = moment_report(Estimator::Is, Regime::Exact, &inputs).unwrap();
        assert_eq!(is.bias, 0.0);
        assert!(is.variance.is_none() && is.mse.is_none());
        let us = moment_report(Estimator::Us, Regime::Exact, &inputs).unwrap();
        assert_eq!(us.mean, 4.0);
    }

    #[test]
    fn report_invariants() {
        for est in [Estimator::Is, Estimator::Us] {
            for regime in [Regime::Unconditional, Regime::Positive] {
                for &(n, c, v, theta) in &[(5, 0.1, 2.0, 3.0), (50, 0.75, 0.3, -1.0), (1, 1.0, 1.0, 0.0)] {
                    let r = moment_report(est, regime, &MomentInputs::new(n, c, v, theta).unwrap()).unwrap();
                    assert!((r.bias - (r.mean - theta)).abs() <= 1e-12);
                    let var = r.variance.unwrap();
                    assert!((r.mse.unwrap() - var - r.bias * r.bias).abs() <= 1e-12);
                    assert!(var >= 0.0);
                }
            }
        }
    }

    #[test]
    fn us_positive_regime_is_unbiased() {
        for &(n, c, theta) in &[(3, 0.2, 5.0), (40, 0.9, -2.0)] {
            let r = moment_report(Estimator::Us, Regime::Positive, &MomentInputs::new(n, c, 1.0, theta).unwrap())
                .unwrap();
            assert_eq!(r.bias, 0.0);
        }
    }

    #[test]
    fn full_support_degeneracy() {
        let inputs = MomentInputs::new(12, 1.0, 2.5, 0.0).unwrap();
        let us = moment_report(Estimator::Us, Regime::Unconditional, &inputs).unwrap();
        let is = moment_report(Estimator::Is, Regime::Unconditional, &inputs).unwrap();
        assert!((us.variance.unwrap() - 2.5 / 12.0).abs() <= 1e-15);
        assert!((is.variance.unwrap() - us.variance.unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn exact_count_bias_vanishes_at_expected_count() {
        let inputs = MomentInputs::new(20, 0.25, 1.0, 7.0).unwrap().with_kappa(5).unwrap();
        let r = moment_report(Estimator::Is, Regime::Exact, &inputs).unwrap();
        assert!(r.bias.abs() <= 1e-15);
    }

    #[test]
    fn exact_regime_averages_to_positive_regime() {
        for &(n, c, theta) in &[(5u64, 0.1, 10.0), (10, 0.5, 1.0), (50, 0.25, -3.0)] {
            let base = MomentInputs::new(n, c, 1.0, theta).unwrap();
            let r = rho(n, c);
            let averaged: f64 = (1..=n)
                .map(|k| {
                    let m = moment_report(Estimator::Is, Regime::Exact, &base.with_kappa(k).unwrap())
                        .unwrap()
                        .mean;
                    binom_pmf(n, c, k) * m
                })
                .sum::<f64>()
                / r;
            let positive = moment_report(Estimator::Is, Regime::Positive, &base).unwrap().mean;
            assert!((averaged - positive).abs() <= 1e-10, "{averaged} vs {positive}");
        }
    }

    #[test]
    fn unconditional_us_mean_is_rho_times_positive() {
        let inputs = MomentInputs::new(7, 0.15, 2.0, 3.5).unwrap();
        let u = moment_report(Estimator::Us, Regime::Unconditional, &inputs).unwrap();
        let p = moment_report(Estimator::Us, Regime::Positive, &inputs).unwrap();
        assert_eq!(rho(7, 0.15) * p.mean, u.mean);
    }

    #[test]
    fn property3_examples() {
        for c in [0.01, 0.3, 0.99, 1.0] {
            assert_eq!(property3_margin(1, c), 0.0);
        }
        for n in 1..50 {
            assert_eq!(property3_margin(n, 1.0), 0.0);
        }
        assert!(property3_margin(10, 0.3) > 0.0);
    }

    #[test]
    fn comparison_predicate() {
        for c in [0.01, 0.3, 0.999, 1.0] {
            assert!(us_beats_is(1, c));
        }
        for n in 1..40 {
            assert!(us_beats_is(n, 1.0));
        }
        // The marginal exception: n = 10, c = 0.5.
        assert!(!us_beats_is(10, 0.5));
        let inputs = MomentInputs::new(10, 0.5, 4.0, 0.0).unwrap();
        let is = moment_report(Estimator::Is, Regime::Positive, &inputs).unwrap();
        let us = moment_report(Estimator::Us, Regime::Positive, &inputs).unwrap();
        assert!(is.variance.unwrap() < us.variance.unwrap());
    }

    #[test]
    fn control_variate_shifts_only_is_bias_terms() {
        let plain = MomentInputs::new(10, 0.3, 2.0, 0.5).unwrap();
        let shifted = MomentInputs::new(10, 0.3, 2.0, 5.5).unwrap().with_control_variate(5.0);
        let a = moment_report(Estimator::Is, Regime::Positive, &plain).unwrap();
        let b = moment_report(Estimator::Is, Regime::Positive, &shifted).unwrap();
        assert!((a.variance.unwrap() - b.variance.unwrap()).abs() <= 1e-15);
        assert!((b.mean - (a.mean + 5.0)).abs() <= 1e-12);
        let us = moment_report(Estimator::Us, Regime::Unconditional, &shifted).unwrap();
        assert!((us.mean - rho(10, 0.3) * 5.5).abs() <= 1e-12);
    }
}
