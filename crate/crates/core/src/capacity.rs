//! Coherent ergodic capacity of the i.i.d. Rayleigh block-fading channel
//! with uniform power allocation, `C(snr) = E[log2(1 + snr·|h|²)]`.
//!
//! Everything is computed in nats internally and converted to bits once, on
//! the way out.

use serde::{Deserialize, Serialize};

use crate::numerics::{draw_cn01, exp_e1, parallel_mean, RngStream};
use crate::{Error, Result, LOG2_E};

pub const MIN_MC_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    ClosedForm,
    MonteCarlo,
    LowerBound,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Bits per signal-space dimension.
    pub bits_per_dim: f64,
    pub method: CapacityMethod,
    pub snr: f64,
    /// Zero for analytic methods.
    pub mc_std_error: f64,
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::Domain(format!("snr must be finite and > 0, got {snr}")));
    }
    Ok(())
}

/// Natural-log capacity `e^{1/snr} E1(1/snr)`.
pub(crate) fn capacity_nats(snr: f64) -> Result<f64> {
    exp_e1(1.0 / snr)
}

pub fn coherent_capacity(snr: f64) -> Result<CapacityResult> {
    check_snr(snr)?;
    Ok(CapacityResult {
        bits_per_dim: LOG2_E * capacity_nats(snr)?,
        method: CapacityMethod::ClosedForm,
        snr,
        mc_std_error: 0.0,
    })
}

/// Low-snr sandwich `log2(e)(snr - snr²) <= C <= log2(e)(snr - (b/2) snr²)`,
/// valid for `b ∈ (0,1)` and `snr < (1-b)/b`.
pub fn coherent_bounds(snr: f64, b: f64) -> Result<(CapacityResult, CapacityResult)> {
    check_snr(snr)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidArgument(format!("bound parameter b must be in (0, 1), got {b}")));
    }
    let limit = (1.0 - b) / b;
    if !(snr < limit) {
        return Err(Error::Domain(format!(
            "low-snr bounds with b = {b} need snr < (1-b)/b = {limit}, got {snr}"
        )));
    }
    let mk = |nats: f64, method| CapacityResult {
        bits_per_dim: LOG2_E * nats,
        method,
        snr,
        mc_std_error: 0.0,
    };
    Ok((
        mk(snr - snr * snr, CapacityMethod::LowerBound),
        mk(snr - 0.5 * b * snr * snr, CapacityMethod::UpperBound),
    ))
}

/// Monte Carlo estimate with `|h|² = (x² + y²)/2`, `x, y` standard normal.
/// Deterministic in `(stream, trials)` regardless of the rayon pool size.
pub fn mc_coherent_capacity(snr: f64, trials: usize, stream: &RngStream) -> Result<CapacityResult> {
    if !(snr >= 0.0 && snr.is_finite()) {
        return Err(Error::Domain(format!("snr must be finite and >= 0, got {snr}")));
    }
    if trials < MIN_MC_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_MC_TRIALS} trials required, got {trials}"
        )));
    }
    if snr == 0.0 {
        return Ok(CapacityResult {
            bits_per_dim: 0.0,
            method: CapacityMethod::MonteCarlo,
            snr,
            mc_std_error: 0.0,
        });
    }
    let est = parallel_mean(stream, trials, |rng| {
        (snr * draw_cn01(rng).norm_sqr()).ln_1p()
    });
    Ok(CapacityResult {
        bits_per_dim: LOG2_E * est.mean,
        method: CapacityMethod::MonteCarlo,
        snr,
        mc_std_error: LOG2_E * est.std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let c = coherent_capacity(0.1).unwrap();
        assert!((c.bits_per_dim - 0.132103).abs() < 1e-5);
        assert_eq!(c.method, CapacityMethod::ClosedForm);
        assert_eq!(c.mc_std_error, 0.0);
        assert!((coherent_capacity(1.0).unwrap().bits_per_dim - 0.86035).abs() < 1e-5);
        assert!((coherent_capacity(1.0).unwrap().bits_per_dim - LOG2_E * 0.59634736).abs() < 1e-7);
    }

    #[test]
    fn converges_to_linear_term() {
        for (snr, tol) in [(1e-2, 0.02), (1e-4, 0.01), (1e-6, 0.01)] {
            let c = coherent_capacity(snr).unwrap().bits_per_dim;
            assert!((c / (LOG2_E * snr) - 1.0).abs() < tol);
        }
    }

    #[test]
    fn bounds() {
        let (lo, hi) = coherent_bounds(0.1, 0.5).unwrap();
        assert!((lo.bits_per_dim - LOG2_E * 0.09).abs() < 1e-15);
        assert!((hi.bits_per_dim - LOG2_E * 0.0975).abs() < 1e-15);
        assert!((lo.bits_per_dim - 0.129843).abs() < 1e-6);
        assert!((hi.bits_per_dim - 0.140663).abs() < 1e-6);
        let c = coherent_capacity(0.1).unwrap().bits_per_dim;
        assert!(lo.bits_per_dim <= c && c <= hi.bits_per_dim);
        // strict precondition: (1-b)/b = 1 is excluded
        assert!(coherent_bounds(1.0, 0.5).is_err());
        assert!(coherent_bounds(0.9, 0.5).is_ok());
        assert!(coherent_bounds(0.1, 0.0).is_err());
        assert!(coherent_bounds(0.1, 1.0).is_err());
    }

    #[test]
    fn sandwiches_and_monotonicity() {
        let mut prev = 0.0;
        for k in 2..=12 {
            let snr = 10f64.powf(-(k as f64) / 2.0);
            let c = coherent_capacity(snr).unwrap().bits_per_dim;
            let (lo, hi) = coherent_bounds(snr, 0.5).unwrap();
            assert!(lo.bits_per_dim <= c && c <= hi.bits_per_dim, "snr {snr}");
            assert!(0.5 * (2.0 * snr).ln_1p() * LOG2_E <= c);
            assert!(c <= snr.ln_1p() * LOG2_E);
        }
        for snr in crate::numerics::log_grid(1e-6, 1e3, 40).unwrap() {
            let c = coherent_capacity(snr).unwrap().bits_per_dim;
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn rejects_bad_snr() {
        assert!(coherent_capacity(0.0).is_err());
        assert!(coherent_capacity(f64::INFINITY).is_err());
        assert!(coherent_capacity(f64::NAN).is_err());
    }

    #[test]
    fn monte_carlo() {
        let s = RngStream::new(2024, 0);
        let zero = mc_coherent_capacity(0.0, 5000, &s).unwrap();
        assert_eq!(zero.bits_per_dim, 0.0);
        assert!(mc_coherent_capacity(0.1, 999, &s).is_err());
        for snr in [0.1, 1.0] {
            let mc = mc_coherent_capacity(snr, 1_000_000, &s).unwrap();
            let exact = coherent_capacity(snr).unwrap().bits_per_dim;
            assert_eq!(mc.method, CapacityMethod::MonteCarlo);
            assert!((mc.bits_per_dim - exact).abs() < 4.0 * mc.mc_std_error, "snr {snr}");
        }
    }
}
