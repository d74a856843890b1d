//! Training-based communication over coherence subspaces.
//!
//! Each subspace of dimension `N_coh` spends one dimension on a pilot carrying
//! a fraction η of the energy `N_coh·snr`; the channel is MMSE-estimated from
//! it and the remaining `N_coh - 1` dimensions carry data. With
//! `K(η) = β(η)·σ²(η)`, the achievable rate is lower bounded by
//! `(1 - 1/N_coh) · ½·log2(1 + 2K)` and η is chosen to maximise `K`.

use serde::{Deserialize, Serialize};

use crate::capacity::MIN_MC_TRIALS;
use crate::numerics::{draw_cn01, loglog_slope, parallel_mean, RngStream};
use crate::{Error, Result, LOG2_E};

/// Optimized training design at one `(N_coh, snr)` operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingDesign {
    /// Fraction of the subspace energy put into the pilot.
    pub eta_star: f64,
    pub k_star: f64,
    /// Pilot energy `E_tr = η*·N_coh·snr`.
    pub training_energy: f64,
    /// Energy per data symbol `E_cm = (1-η*)·N_coh·snr/(N_coh-1)`.
    pub data_energy: f64,
    /// Channel estimation error `1/(1 + E_tr)`.
    pub mse: f64,
    /// Optimized lower bound in bits per dimension.
    pub bound_bits: f64,
    pub coherence_dim: f64,
    pub snr: f64,
}

fn check_point(eta: f64, n_coh: f64, snr: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta must be in [0, 1], got {eta}")));
    }
    if !(n_coh > 1.0 && n_coh.is_finite()) {
        return Err(Error::Domain(format!("N_coh must be finite and > 1, got {n_coh}")));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::Domain(format!("snr must be finite and > 0, got {snr}")));
    }
    Ok(())
}

/// Effective data gain β and estimate variance σ² for training fraction η.
pub fn beta_sigma(eta: f64, n_coh: f64, snr: f64) -> Result<(f64, f64)> {
    check_point(eta, n_coh, snr)?;
    let e = n_coh * snr;
    let pilot = 1.0 + eta * e;
    let denom = (n_coh - 1.0) * pilot + (1.0 - eta) * e;
    assert!(denom > 0.0, "beta denominator must be positive");
    let beta = (1.0 - eta) * pilot * e / denom;
    let sigma_sq = eta * e / pilot;
    Ok((beta, sigma_sq))
}

/// `K(η) = η(1-η)(N·snr)² / [(N-1)(1 + η·N·snr) + (1-η)·N·snr]`.
pub fn training_gain(eta: f64, n_coh: f64, snr: f64) -> Result<f64> {
    check_point(eta, n_coh, snr)?;
    let e = n_coh * snr;
    Ok(eta * (1.0 - eta) * e * e / ((n_coh - 1.0) * (1.0 + eta * e) + (1.0 - eta) * e))
}

/// `½·log2(1 + 2βσ²)` for a given η, before the `(1 - 1/N_coh)` pilot
/// overhead is applied.
pub fn lemma1_bound(eta: f64, n_coh: f64, snr: f64) -> Result<f64> {
    let (beta, sigma_sq) = beta_sigma(eta, n_coh, snr)?;
    Ok(0.5 * LOG2_E * (2.0 * beta * sigma_sq).ln_1p())
}

/// Closed-form optimum for `N_coh > 2`.
///
/// With `A = N·snr + N - 1` and `x = N·snr·(N-2)/A` the optimum is
/// `η* = A/((N-2)·N·snr)·(√(1+x) - 1)`. Writing `√(1+x) - 1 = x/(√(1+x) + 1)`
/// reduces this to `η* = 1/(1 + √(1+x))` and `K* = (N·snr·η*)²/A`, which avoid
/// the cancellation of the original form when `x` is small.
pub fn optimize_training(n_coh: f64, snr: f64) -> Result<TrainingDesign> {
    if !(n_coh > 2.0 && n_coh.is_finite()) {
        return Err(Error::Domain(format!(
            "closed-form training optimum needs N_coh > 2, got {n_coh}; \
             use optimize_training_grid for N_coh in (1, 2]"
        )));
    }
    check_point(0.0, n_coh, snr)?;
    let e = n_coh * snr;
    let a = e + n_coh - 1.0;
    let x = e * (n_coh - 2.0) / a;
    let eta_star = 1.0 / (1.0 + (1.0 + x).sqrt());
    let k_star = (e * eta_star).powi(2) / a;
    Ok(design(eta_star, k_star, n_coh, snr))
}

fn design(eta: f64, k: f64, n_coh: f64, snr: f64) -> TrainingDesign {
    let e = n_coh * snr;
    let training_energy = eta * e;
    TrainingDesign {
        eta_star: eta,
        k_star: k,
        training_energy,
        data_energy: (1.0 - eta) * e / (n_coh - 1.0),
        mse: 1.0 / (1.0 + training_energy),
        bound_bits: (1.0 - 1.0 / n_coh) * 0.5 * LOG2_E * (2.0 * k).ln_1p(),
        coherence_dim: n_coh,
        snr,
    }
}

/// Grid-search optimum of `K(η)`, usable for any `N_coh > 1`.
///
/// For `N_coh ∈ (1, 2]` the closed form does not apply; this is a plain
/// numerical maximisation, not a closed-form result.
pub fn optimize_training_grid(n_coh: f64, snr: f64, points: usize) -> Result<TrainingDesign> {
    check_point(0.0, n_coh, snr)?;
    if points < 3 {
        return Err(Error::InvalidArgument("grid search needs >= 3 points".into()));
    }
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..points {
        let eta = i as f64 / (points - 1) as f64;
        let k = training_gain(eta, n_coh, snr)?;
        if k > best.1 {
            best = (eta, k);
        }
    }
    Ok(design(best.0, best.1, n_coh, snr))
}

/// One grid point of the large-dimension diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Point {
    pub snr: f64,
    pub coherence_dim: f64,
    pub eta_star: f64,
    pub mse: f64,
    pub training_energy: f64,
}

/// Behaviour of η*, mse and E_tr along `N_coh = snr^{-μ}` as snr falls.
///
/// Decay rates are log-log regression slopes against snr, fitted over the
/// low-snr half of the grid. The whole-grid slopes are reported as well;
/// they are biased by the lower-order corrections at the high-snr end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Diagnostics {
    pub mu: f64,
    pub points: Vec<Theorem2Point>,
    pub eta_slope: f64,
    pub training_energy_slope: f64,
    pub eta_slope_full_grid: f64,
    pub training_energy_slope_full_grid: f64,
    /// `(μ-1)/2`, the predicted η* slope when `μ > 1`.
    pub expected_eta_slope: Option<f64>,
    /// `(1-μ)/2`, the predicted E_tr slope when `μ > 1`.
    pub expected_training_energy_slope: Option<f64>,
}

impl Theorem2Diagnostics {
    /// Values at the smallest snr of the grid.
    pub fn endpoint(&self) -> &Theorem2Point {
        self.points.last().expect("grid is non-empty")
    }
}

pub fn theorem2_diagnostics(mu: f64, snr_grid: &[f64]) -> Result<Theorem2Diagnostics> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    if snr_grid.len() < 4 || snr_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("snr grid must be decreasing with >= 4 points".into()));
    }
    if snr_grid[0] / snr_grid[snr_grid.len() - 1] < 1e4 {
        return Err(Error::InvalidArgument("snr grid must span at least 4 decades".into()));
    }
    let points = snr_grid
        .iter()
        .map(|&snr| {
            let n_coh = snr.powf(-mu);
            let d = optimize_training(n_coh, snr)?;
            Ok(Theorem2Point {
                snr,
                coherence_dim: n_coh,
                eta_star: d.eta_star,
                mse: d.mse,
                training_energy: d.training_energy,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let slope = |pts: &[Theorem2Point], f: fn(&Theorem2Point) -> f64| {
        let xs: Vec<f64> = pts.iter().map(|p| p.snr).collect();
        let ys: Vec<f64> = pts.iter().map(f).collect();
        loglog_slope(&xs, &ys)
    };
    let tail = &points[points.len() / 2..];
    let predicted = mu > 1.0;
    Ok(Theorem2Diagnostics {
        mu,
        eta_slope: slope(tail, |p| p.eta_star)?,
        training_energy_slope: slope(tail, |p| p.training_energy)?,
        eta_slope_full_grid: slope(&points, |p| p.eta_star)?,
        training_energy_slope_full_grid: slope(&points, |p| p.training_energy)?,
        expected_eta_slope: predicted.then(|| (mu - 1.0) / 2.0),
        expected_training_energy_slope: predicted.then(|| (1.0 - mu) / 2.0),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McTrainingBound {
    pub bits_per_dim: f64,
    pub std_error: f64,
    pub eta: f64,
    pub trials: usize,
}

/// Monte Carlo value of `(1 - 1/N)·E[log2(1 + β|ĥ|²)]` at the optimal η,
/// with `ĥ ~ CN(0, σ²)`. This is the quantity the closed-form bound lower
/// bounds.
pub fn mc_training_bound(n_coh: f64, snr: f64, trials: usize, stream: &RngStream) -> Result<McTrainingBound> {
    let d = optimize_training(n_coh, snr)?;
    mc_training_bound_at(d.eta_star, n_coh, snr, trials, stream)
}

/// As [`mc_training_bound`] for an arbitrary training fraction.
pub fn mc_training_bound_at(
    eta: f64,
    n_coh: f64,
    snr: f64,
    trials: usize,
    stream: &RngStream,
) -> Result<McTrainingBound> {
    if trials < MIN_MC_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_MC_TRIALS} trials required, got {trials}"
        )));
    }
    let (beta, sigma_sq) = beta_sigma(eta, n_coh, snr)?;
    let overhead = 1.0 - 1.0 / n_coh;
    if beta * sigma_sq == 0.0 {
        return Ok(McTrainingBound { bits_per_dim: 0.0, std_error: 0.0, eta, trials });
    }
    let gain = beta * sigma_sq;
    let est = parallel_mean(stream, trials, |rng| (gain * draw_cn01(rng).norm_sqr()).ln_1p());
    Ok(McTrainingBound {
        bits_per_dim: overhead * LOG2_E * est.mean,
        std_error: overhead * LOG2_E * est.std_error,
        eta,
        trials,
    })
}
