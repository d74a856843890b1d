//! Sparse multipath channel model.
//!
//! Delay and Doppler diversity grow sub-linearly with bandwidth and duration,
//! `D_W ~ (Tm·W)^δ2`, `D_T ~ (T·Wd)^δ1`, and the leftover signal-space
//! dimensions form coherence subspaces of size `N_coh = T_coh·W_coh`.

mod binning;
mod scaling;

pub use binning::{bin_paths, count_dof, delay_bin_index, doppler_bin_index, Path, PathSet, VirtualChannel};
pub use scaling::{check_mu_condition, corollary_f3, make_power_laws, MuCondition, MuVerdict, ScalingLaw};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical channel description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Delay spread `Tm` in seconds.
    pub delay_spread_s: f64,
    /// Two-sided Doppler spread `Wd` in hertz.
    pub doppler_spread_hz: f64,
    /// Doppler sparsity exponent δ1.
    pub delta1: f64,
    /// Delay sparsity exponent δ2.
    pub delta2: f64,
}

impl ChannelParams {
    pub fn new(delay_spread_s: f64, doppler_spread_hz: f64, delta1: f64, delta2: f64) -> Result<Self> {
        let p = Self { delay_spread_s, doppler_spread_hz, delta1, delta2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (tm, wd) = (self.delay_spread_s, self.doppler_spread_hz);
        if !(tm > 0.0 && tm.is_finite() && wd > 0.0 && wd.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delay and Doppler spreads must be positive (Tm={tm}, Wd={wd})"
            )));
        }
        if tm * wd >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "channel must be underspread, Tm*Wd = {} >= 1",
                tm * wd
            )));
        }
        for (name, d) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidArgument(format!("{name} = {d} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Tm·Wd
    pub fn spread_product(&self) -> f64 {
        self.delay_spread_s * self.doppler_spread_hz
    }
}

/// Signaling duration, bandwidth and noise-normalized transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalingParams {
    pub duration_s: f64,
    pub bandwidth_hz: f64,
    /// Transmit power over noise spectral density, in hertz.
    pub power_hz: f64,
}

impl SignalingParams {
    pub fn new(duration_s: f64, bandwidth_hz: f64, power_hz: f64) -> Result<Self> {
        let s = Self { duration_s, bandwidth_hz, power_hz };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("duration", self.duration_s),
            ("bandwidth", self.bandwidth_hz),
            ("power", self.power_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Energy per signal-space dimension, `P/W`.
    pub fn snr(&self) -> f64 {
        self.power_hz / self.bandwidth_hz
    }
}

/// Diversity and coherence quantities implied by a channel and a signaling
/// choice. Diversities are kept real (no ceilings).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceGeometry {
    pub doppler_diversity: f64,
    pub delay_diversity: f64,
    pub dof: f64,
    pub coherence_time_s: f64,
    pub coherence_bandwidth_hz: f64,
    pub coherence_dim: f64,
    pub snr: f64,
    /// Exponent μ with `N_coh = snr^{-μ}`; `None` when `snr = 1`.
    pub mu_eff: Option<f64>,
    /// `T·Wd >= 1` and `Tm·W >= 1`, i.e. at least one resolvable bin per axis.
    pub resolved: bool,
}

pub fn coherence_geometry(params: &ChannelParams, sig: &SignalingParams) -> Result<CoherenceGeometry> {
    params.validate()?;
    sig.validate()?;
    let (tm, wd) = (params.delay_spread_s, params.doppler_spread_hz);
    let (t, w) = (sig.duration_s, sig.bandwidth_hz);
    let (d1, d2) = (params.delta1, params.delta2);

    let doppler_diversity = (t * wd).powf(d1);
    let delay_diversity = (tm * w).powf(d2);
    let coherence_time_s = t.powf(1.0 - d1) / wd.powf(d1);
    let coherence_bandwidth_hz = w.powf(1.0 - d2) / tm.powf(d2);
    let coherence_dim = coherence_time_s * coherence_bandwidth_hz;
    let snr = sig.snr();
    let mu_eff = if snr == 1.0 {
        None
    } else {
        Some(-coherence_dim.ln() / snr.ln())
    };
    Ok(CoherenceGeometry {
        doppler_diversity,
        delay_diversity,
        dof: doppler_diversity * delay_diversity,
        coherence_time_s,
        coherence_bandwidth_hz,
        coherence_dim,
        snr,
        mu_eff,
        resolved: t * wd >= 1.0 && tm * w >= 1.0,
    })
}

/// Signaling duration that makes `N_coh = snr^{-μ}` for the given bandwidth
/// and power:
///
/// `T = (Tm^δ2 · Wd^δ1)^{1/(1-δ1)} · W^{(μ-1+δ2)/(1-δ1)} / P^{μ/(1-δ1)}`
pub fn required_duration(params: &ChannelParams, bandwidth_hz: f64, power_hz: f64, mu: f64) -> Result<f64> {
    params.validate()?;
    SignalingParams::new(1.0, bandwidth_hz, power_hz)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    let (d1, d2) = (params.delta1, params.delta2);
    if d1 >= 1.0 {
        return Err(Error::SaturatedDoppler(
            "coherence time does not grow with T; only peaky signaling can raise mu \
             (see asymptotics::peaky_duration_exponent)"
                .into(),
        ));
    }
    let inv = 1.0 / (1.0 - d1);
    // log domain keeps large exponents from overflowing intermediate powers
    let ln_t = inv
        * (d2 * params.delay_spread_s.ln() + d1 * params.doppler_spread_hz.ln()
            + (mu - 1.0 + d2) * bandwidth_hz.ln()
            - mu * power_hz.ln());
    Ok(ln_t.exp())
}

/// Coherence-time growth needed for operational coherence level ε when the
/// coherence bandwidth scales as `W^{1-δ2}`: `T_coh ∝ W^{2ε+δ2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcohRequirement {
    pub exponent: f64,
    /// `W^exponent` with unit constant.
    pub value: f64,
}

pub fn tcoh_requirement(delta2: f64, epsilon: f64, bandwidth_hz: f64) -> Result<TcohRequirement> {
    if !(0.0..=1.0).contains(&epsilon) || !(0.0..=1.0).contains(&delta2) {
        return Err(Error::InvalidArgument(format!(
            "epsilon and delta2 must lie in [0, 1] (epsilon={epsilon}, delta2={delta2})"
        )));
    }
    if !(bandwidth_hz > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    let exponent = 2.0 * epsilon + delta2;
    Ok(TcohRequirement { exponent, value: bandwidth_hz.powf(exponent) })
}
