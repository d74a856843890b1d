//! Generic sub-linear coherence scaling laws `W_coh = f1(W)`, `T_coh = f2(T)`
//! and the duration law `T = f3(W)` that reaches a target μ.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ChannelParams;
use crate::{Error, Result};

type LawFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

const MAX_BRACKET_STEPS: usize = 2100;
const MAX_BISECTIONS: usize = 300;

/// A strictly increasing function of a positive real.
#[derive(Clone)]
pub struct ScalingLaw {
    f: Arc<LawFn>,
    pub description: String,
}

impl fmt::Debug for ScalingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalingLaw").field("description", &self.description).finish()
    }
}

impl ScalingLaw {
    pub fn new<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { f: Arc::new(move |x| Ok(f(x))), description: description.into() }
    }

    pub fn power(exponent: f64) -> Self {
        Self::new(format!("x^{exponent}"), move |x: f64| x.powf(exponent))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.f)(x)
    }

    /// Solves `self(x) = y` for `x > 0` by bracketed bisection, growing or
    /// shrinking the bracket by factors of two from `x = 1`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let f = |x: f64| self.eval(x);
        let not_monotone = |a: f64, b: f64| {
            Error::NotMonotone(format!("{} fails to increase on [{a:e}, {b:e}]", self.description))
        };
        let (mut lo, mut hi) = (1.0f64, 1.0f64);
        let (mut f_lo, mut f_hi) = (f(1.0)?, f(1.0)?);
        let mut steps = 0;
        while f_hi < y {
            let next = hi * 2.0;
            let f_next = f(next)?;
            if !(f_next > f_hi) {
                return Err(not_monotone(hi, next));
            }
            (lo, f_lo, hi, f_hi) = (hi, f_hi, next, f_next);
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(Error::Domain(format!("{} never reaches {y:e}", self.description)));
            }
        }
        while f_lo > y {
            let next = lo * 0.5;
            let f_next = f(next)?;
            if !(f_next < f_lo) {
                return Err(not_monotone(next, lo));
            }
            (hi, f_hi, lo, f_lo) = (lo, f_lo, next, f_next);
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lo == 0.0 {
                return Err(Error::Domain(format!("{} never falls to {y:e}", self.description)));
            }
        }
        if f_lo == y {
            return Ok(lo);
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = f(mid)?;
            if !(f_lo <= f_mid && f_mid <= f_hi) {
                return Err(not_monotone(lo, hi));
            }
            if f_mid < y {
                (lo, f_lo) = (mid, f_mid);
            } else {
                (hi, f_hi) = (mid, f_mid);
            }
        }
        Ok(if (y - f_lo).abs() <= (f_hi - y).abs() { lo } else { hi })
    }
}

fn saturated() -> Error {
    Error::SaturatedDoppler("coherence time is constant, no duration law exists".into())
}

/// Power-law instances: `f1(x) = x^{1-δ2}`, `f2(x) = x^{1-δ1}`,
/// `f3(x) = x^{(μ-1+δ2)/(1-δ1)}`.
pub fn make_power_laws(params: &ChannelParams, mu: f64) -> Result<(ScalingLaw, ScalingLaw, ScalingLaw)> {
    params.validate()?;
    if params.delta1 >= 1.0 {
        return Err(saturated());
    }
    Ok((
        ScalingLaw::power(1.0 - params.delta2),
        ScalingLaw::power(1.0 - params.delta1),
        ScalingLaw::power((mu - 1.0 + params.delta2) / (1.0 - params.delta1)),
    ))
}

/// `f3(x) = f2⁻¹(x^μ / f1(x))`, with `f2` inverted numerically on demand.
pub fn corollary_f3(f1: &ScalingLaw, f2: &ScalingLaw, mu: f64) -> ScalingLaw {
    let (f1, f2) = (f1.clone(), f2.clone());
    let description = format!("{}^-1(x^{mu} / {})", f2.description, f1.description);
    ScalingLaw {
        f: Arc::new(move |x: f64| f2.invert(x.powf(mu) / f1.eval(x)?)),
        description,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MuVerdict {
    Pass,
    Borderline,
    Fail,
}

/// Finite-grid evidence for `f1(x)·f2(f3(x)) ∼ w(x^μ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCondition {
    pub verdict: MuVerdict,
    pub grid: Vec<f64>,
    /// `r(x) = f1(x)·f2(f3(x)) / x^μ` at each grid point.
    pub ratios: Vec<f64>,
    /// `r(last) / r(first)`.
    pub growth: f64,
}

const RATIO_REL_TOL: f64 = 1e-9;

/// Divergence of the ratio cannot be decided on a finite grid; the verdict is
/// PASS when `r` is non-decreasing over the upper half of the grid and grows
/// by more than 10x end to end, FAIL when it decreases, BORDERLINE otherwise.
pub fn check_mu_condition(
    f1: &ScalingLaw,
    f3: &ScalingLaw,
    f2: &ScalingLaw,
    mu: f64,
    grid: &[f64],
) -> Result<MuCondition> {
    if grid.len() < 5 || grid.windows(2).any(|w| !(w[0] < w[1])) || !(grid[0] > 0.0) {
        return Err(Error::InvalidArgument("grid must be positive, increasing, >= 5 points".into()));
    }
    if grid[grid.len() - 1] / grid[0] < 1e4 {
        return Err(Error::InvalidArgument("grid must span at least 4 decades".into()));
    }
    let ratios = grid
        .iter()
        .map(|&x| Ok(f1.eval(x)? * f2.eval(f3.eval(x)?)? / x.powf(mu)))
        .collect::<Result<Vec<f64>>>()?;
    let growth = ratios[ratios.len() - 1] / ratios[0];
    let upper = &ratios[ratios.len() / 2..];
    let non_decreasing = upper.windows(2).all(|w| w[1] >= w[0] * (1.0 - RATIO_REL_TOL));
    let non_increasing = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + RATIO_REL_TOL));
    let verdict = if non_decreasing && growth > 10.0 {
        MuVerdict::Pass
    } else if non_increasing && growth < 1.0 - RATIO_REL_TOL {
        MuVerdict::Fail
    } else {
        MuVerdict::Borderline
    };
    Ok(MuCondition { verdict, grid: grid.to_vec(), ratios, growth })
}
