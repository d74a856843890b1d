//! Numerical kernels shared by the rest of the crate.

mod expint;
mod fit;
mod rng;
mod sum;

pub use expint::exp_e1;
pub use fit::{fit_poly_through_origin, loglog_slope, PolyFit};
pub(crate) use rng::draw_cn01;
pub use rng::{parallel_mean, sample_cn01, McEstimate, RngStream};
pub use sum::ExactSum;

use crate::{Error, Result};

/// `n` logarithmically spaced points from `min` to `max`, both included.
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > 0.0 && min.is_finite() && max.is_finite()) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "log grid needs positive finite bounds and n >= 2 (min={min}, max={max}, n={n})"
        )));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                min
            } else if i == n - 1 {
                max
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// `n` evenly spaced points from `min` to `max`, both included.
pub fn linear_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "linear grid needs finite bounds and n >= 2 (min={min}, max={max}, n={n})"
        )));
    }
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                max
            } else {
                min + (max - min) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}
