//! Low-snr expansion fits of the training bound, peaky signaling, and the
//! comparison of T-vs-W scaling between non-peaky and peaky training.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::numerics::fit_poly_through_origin;
use crate::training::optimize_training;
use crate::{Error, Result, LOG2_E};

const MIN_FIT_POINTS: usize = 6;
const MIN_FIT_DECADES: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSource {
    OptimizedBound,
    MonteCarlo,
    ClosedForm,
}

/// Least-squares expansion `bits ≈ Σ c_k·snr^{p_k}` through the origin.
///
/// `c1` is the coefficient of `snr`, `c2` that of `snr²` when it was fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub c1: f64,
    pub c2: Option<f64>,
    pub powers: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub snr_grid: Vec<f64>,
    pub residual_rms: f64,
    pub source: FitSource,
}

impl ExpansionFit {
    pub fn coefficient_of(&self, power: f64) -> Option<f64> {
        self.powers.iter().position(|&p| p == power).map(|i| self.coefficients[i])
    }
}

/// Relative tolerances used to decide whether a coefficient is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTolerances {
    pub c1_rel: f64,
    pub c2_rel: f64,
}

impl Default for CoefficientTolerances {
    fn default() -> Self {
        Self { c1_rel: 0.01, c2_rel: 0.15 }
    }
}

fn check_fit_grid(snr_grid: &[f64]) -> Result<()> {
    if snr_grid.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "expansion fit needs >= {MIN_FIT_POINTS} grid points, got {}",
            snr_grid.len()
        )));
    }
    if snr_grid.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument("snr grid must be positive and finite".into()));
    }
    let (lo, hi) = snr_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if (hi / lo).log10() < MIN_FIT_DECADES - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "snr grid must span >= {MIN_FIT_DECADES} decades, spans [{lo:e}, {hi:e}]"
        )));
    }
    Ok(())
}

/// Fits `values` (bits per dimension) on `snr_grid` against the given powers
/// of snr. `powers` must contain 1.
pub fn fit_expansion(snr_grid: &[f64], values: &[f64], powers: &[f64], source: FitSource) -> Result<ExpansionFit> {
    check_fit_grid(snr_grid)?;
    if !powers.contains(&1.0) {
        return Err(Error::InvalidArgument("expansion powers must include 1".into()));
    }
    let fit = fit_poly_through_origin(snr_grid, values, powers)?;
    Ok(ExpansionFit {
        c1: fit.coefficient_of(1.0).expect("power 1 is fitted"),
        c2: fit.coefficient_of(2.0),
        powers: fit.powers,
        coefficients: fit.coefficients,
        snr_grid: snr_grid.to_vec(),
        residual_rms: fit.residual_rms,
        source,
    })
}

/// `bits ≈ c1·snr + c2·snr²`.
pub fn fit_capacity_coefficients(snr_grid: &[f64], values: &[f64], source: FitSource) -> Result<ExpansionFit> {
    fit_expansion(snr_grid, values, &[1.0, 2.0], source)
}

/// Optimized training bound along `N_coh = snr^{-μ}`.
pub fn training_bound_curve(mu: f64, snr_grid: &[f64]) -> Result<Vec<f64>> {
    snr_grid
        .iter()
        .map(|&snr| Ok(optimize_training(snr.powf(-mu), snr)?.bound_bits))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    FirstOrderFails,
    FirstOrderOnly,
    SecondOrder,
}

/// Fitted correction term compared with its predicted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTerm {
    pub power: f64,
    pub fitted: f64,
    pub reference: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub mu: f64,
    pub fit: ExpansionFit,
    pub c1_reference: f64,
    pub c1_relative_error: f64,
    /// Absent for `μ <= 1`, where no correction is predicted.
    pub correction: Option<CorrectionTerm>,
    pub classification: Classification,
}

/// Fits the optimized training bound along `N_coh = snr^{-μ}` with the
/// powers appropriate to μ and classifies the operational coherence level.
///
/// - `μ <= 1`: powers `[1, 2]`; only c1 is examined.
/// - `1 < μ < 3`: powers `[1, (1+μ)/2]`; the fractional term is compared
///   against `-2·log2(e)`.
/// - `μ = 3`: powers `[1, 2]`; c2 against `-3·log2(e)`.
/// - `μ > 3`: powers `[1, 2, (1+μ)/2]`, the last as a nuisance column that
///   absorbs the leading neglected term; c2 against `-log2(e)`.
///
/// Second-order optimality means c1 is attained and c2 is within tolerance
/// of `-log2(e)`.
pub fn theorem1_coefficient_check(mu: f64, snr_grid: &[f64], tol: &CoefficientTolerances) -> Result<CoefficientCheck> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    let half = (1.0 + mu) / 2.0;
    let (powers, correction_ref) = if mu <= 1.0 {
        (vec![1.0, 2.0], None)
    } else if mu < 3.0 {
        (vec![1.0, half], Some((half, -2.0 * LOG2_E)))
    } else if mu == 3.0 {
        (vec![1.0, 2.0], Some((2.0, -3.0 * LOG2_E)))
    } else {
        (vec![1.0, 2.0, half], Some((2.0, -LOG2_E)))
    };
    let values = training_bound_curve(mu, snr_grid)?;
    let fit = fit_expansion(snr_grid, &values, &powers, FitSource::OptimizedBound)?;
    let c1_relative_error = (fit.c1 - LOG2_E).abs() / LOG2_E;
    let correction = correction_ref.map(|(power, reference)| {
        let fitted = fit.coefficient_of(power).expect("reference power is fitted");
        CorrectionTerm { power, fitted, reference, relative_error: (fitted - reference).abs() / reference.abs() }
    });
    let second_order = fit
        .c2
        .map(|c2| (c2 + LOG2_E).abs() / LOG2_E < tol.c2_rel)
        .unwrap_or(false);
    let classification = if c1_relative_error >= tol.c1_rel {
        Classification::FirstOrderFails
    } else if second_order {
        Classification::SecondOrder
    } else {
        Classification::FirstOrderOnly
    };
    Ok(CoefficientCheck { mu, fit, c1_reference: LOG2_E, c1_relative_error, correction, classification })
}

/// Peaky signaling: only a fraction `ζ = snr^γ` of the dimensions is used,
/// each at per-symbol snr `snr' = snr^{1-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakyParams {
    pub gamma: f64,
}

impl PeakyParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("peakiness gamma must be in (0, 1), got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn duty_fraction(&self, snr: f64) -> f64 {
        snr.powf(self.gamma)
    }

    pub fn boosted_snr(&self, snr: f64) -> f64 {
        snr.powf(1.0 - self.gamma)
    }
}

/// `ζ·I(snr')`, with `I` the optimized training bound and the coherence
/// dimension `N_coh = snr^{-(μ-γ)} = snr'^{-(μ-γ)/(1-γ)}`.
pub fn peaky_mutual_info(pp: &PeakyParams, mu: f64, snr: f64) -> Result<f64> {
    PeakyParams::new(pp.gamma)?;
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::Domain(format!("snr must be finite and > 0, got {snr}")));
    }
    let boosted = pp.boosted_snr(snr);
    if boosted >= 1.0 {
        return Err(Error::Domain(format!("boosted snr {boosted} >= 1 leaves the low-snr regime")));
    }
    let n_coh = boosted.powf(-(mu - pp.gamma) / (1.0 - pp.gamma));
    Ok(pp.duty_fraction(snr) * optimize_training(n_coh, boosted)?.bound_bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    NpTs,
    PTs,
    Tie,
}

/// Which training scheme needs the slower growth of T with W for
/// operational coherence level ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub delta1: f64,
    pub delta2: f64,
    pub epsilon: f64,
    /// `(2ε+δ2)/(1-δ1)`; undefined when `δ1 = 1`.
    pub np_ts_exponent: Option<f64>,
    /// `1+2ε`.
    pub p_ts_exponent: f64,
    pub favorable: Scheme,
    pub note: Option<String>,
}

/// NP_TS is favorable iff `(1+2ε)·δ1 + δ2 < 1`, TIE at equality.
pub fn classify_region(delta1: f64, delta2: f64, epsilon: f64) -> Result<RegionVerdict> {
    if !(0.0..=1.0).contains(&delta1) || !(0.0..=1.0).contains(&delta2) {
        return Err(Error::InvalidArgument(format!(
            "sparsity exponents must lie in [0, 1], got ({delta1}, {delta2})"
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let p_ts_exponent = 1.0 + 2.0 * epsilon;
    if delta1 == 1.0 {
        return Ok(RegionVerdict {
            delta1,
            delta2,
            epsilon,
            np_ts_exponent: None,
            p_ts_exponent,
            favorable: Scheme::PTs,
            note: Some("delta1 = 1: non-peaky training cannot reach first-order optimality".into()),
        });
    }
    let lhs = p_ts_exponent * delta1 + delta2;
    let favorable = if lhs < 1.0 {
        Scheme::NpTs
    } else if lhs > 1.0 {
        Scheme::PTs
    } else {
        Scheme::Tie
    };
    Ok(RegionVerdict {
        delta1,
        delta2,
        epsilon,
        np_ts_exponent: Some((2.0 * epsilon + delta2) / (1.0 - delta1)),
        p_ts_exponent,
        favorable,
        note: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeakyDuration {
    /// `T ∝ W^exponent`.
    Exponent { exponent: f64 },
    /// `δ1 = 1`: coherence is reached through peakiness alone, which needs
    /// `γ >= μ + δ2 - 1` with `γ < 1`.
    Feasible { required_gamma: f64 },
    Infeasible { required_gamma: f64 },
}

/// Exponent `(μ + δ2 - 1 - γ)/(1 - δ1)` of the T-vs-W law under peaky
/// signaling, or a feasibility verdict when `δ1 = 1`.
pub fn peaky_duration_exponent(params: &ChannelParams, mu: f64, gamma: f64) -> Result<PeakyDuration> {
    params.validate()?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma must be in [0, 1), got {gamma}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    if params.delta1 >= 1.0 {
        let required_gamma = mu + params.delta2 - 1.0;
        return Ok(if gamma >= required_gamma && required_gamma < 1.0 {
            PeakyDuration::Feasible { required_gamma }
        } else {
            PeakyDuration::Infeasible { required_gamma }
        });
    }
    Ok(PeakyDuration::Exponent { exponent: (mu + params.delta2 - 1.0 - gamma) / (1.0 - params.delta1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::coherent_capacity;
    use crate::numerics::log_grid;
    use proptest::prelude::*;

    fn default_grid() -> Vec<f64> {
        log_grid(1e-4, 1e-2, 12).unwrap()
    }

    #[test]
    fn exact_polynomial_fit() {
        let grid = default_grid();
        let vals: Vec<f64> = grid.iter().map(|s| LOG2_E * (s - s * s)).collect();
        let f = fit_capacity_coefficients(&grid, &vals, FitSource::ClosedForm).unwrap();
        assert!((f.c1 - LOG2_E).abs() < 1e-10);
        assert!((f.c2.unwrap() + LOG2_E).abs() < 1e-10);
    }

    #[test]
    fn coherent_capacity_limits() {
        let grid = log_grid(3e-5, 3e-3, 12).unwrap();
        let vals: Vec<f64> = grid.iter().map(|&s| coherent_capacity(s).unwrap().bits_per_dim).collect();
        let f = fit_capacity_coefficients(&grid, &vals, FitSource::ClosedForm).unwrap();
        assert!((f.c1 / LOG2_E - 1.0).abs() < 0.01);
        assert!((f.c2.unwrap() / LOG2_E + 1.0).abs() < 0.10);
    }

    #[test]
    fn capacity_fit_improves_as_grid_shrinks() {
        let mut prev = f64::INFINITY;
        for hi in [1e-1, 1e-2, 1e-3] {
            let grid = log_grid(hi * 1e-3, hi, 12).unwrap();
            let vals: Vec<f64> = grid.iter().map(|&s| coherent_capacity(s).unwrap().bits_per_dim).collect();
            let err = (fit_capacity_coefficients(&grid, &vals, FitSource::ClosedForm).unwrap().c1 - LOG2_E).abs();
            assert!(err < prev, "{err} !< {prev}");
            prev = err;
        }
    }

    #[test]
    fn grid_requirements() {
        let short = log_grid(1e-3, 1e-2, 12).unwrap();
        let vals = vec![0.0; 12];
        assert!(fit_capacity_coefficients(&short, &vals, FitSource::ClosedForm).is_err());
        let few = log_grid(1e-4, 1e-2, 5).unwrap();
        assert!(fit_capacity_coefficients(&few, &vals[..5], FitSource::ClosedForm).is_err());
    }

    #[test]
    fn sub_unit_mu_fails_first_order() {
        let grid = default_grid();
        let vals = training_bound_curve(0.8, &grid).unwrap();
        let f = fit_capacity_coefficients(&grid, &vals, FitSource::OptimizedBound).unwrap();
        assert!(f.c1 < 0.95 * LOG2_E);
    }

    #[test]
    fn coefficient_checks() {
        let tol = CoefficientTolerances::default();
        let grid = default_grid();
        let c = theorem1_coefficient_check(2.0, &grid, &tol).unwrap();
        assert!(c.c1_relative_error < 0.01);
        let corr = c.correction.unwrap();
        assert_eq!(corr.power, 1.5);
        assert!(corr.relative_error < 0.15, "{corr:?}");

        let c = theorem1_coefficient_check(3.0, &grid, &tol).unwrap();
        assert!(c.correction.unwrap().relative_error < 0.15);
        assert_eq!(c.classification, Classification::FirstOrderOnly);

        let c = theorem1_coefficient_check(3.5, &grid, &tol).unwrap();
        assert!(c.correction.unwrap().relative_error < 0.15);
        assert_eq!(c.classification, Classification::SecondOrder);

        let c = theorem1_coefficient_check(1.0, &grid, &tol).unwrap();
        assert!(c.fit.c1 < 0.95 * LOG2_E);
        let c = theorem1_coefficient_check(0.7, &grid, &tol).unwrap();
        assert!(c.fit.c1 < 0.8 * LOG2_E);
    }

    #[test]
    fn classification_monotone_in_mu() {
        let tol = CoefficientTolerances::default();
        let rank = |c: Classification| match c {
            Classification::FirstOrderFails => 0,
            Classification::FirstOrderOnly => 1,
            Classification::SecondOrder => 2,
        };
        let ranks: Vec<i32> = [0.7, 1.0, 1.5, 2.0, 3.0, 3.5]
            .iter()
            .map(|&mu| rank(theorem1_coefficient_check(mu, &default_grid(), &tol).unwrap().classification))
            .collect();
        assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{ranks:?}");
        assert_eq!(ranks[0], 0);
        assert_eq!(ranks[5], 2);
    }

    #[test]
    fn peaky_identities() {
        let pp = PeakyParams::new(0.3).unwrap();
        for snr in [1e-6, 1e-3, 0.5] {
            assert!((pp.duty_fraction(snr) * pp.boosted_snr(snr) / snr - 1.0).abs() < 1e-12);
        }
        assert!(PeakyParams::new(0.0).is_err());
        assert!(PeakyParams::new(1.0).is_err());
    }

    #[test]
    fn peaky_zero_limit() {
        let pp = PeakyParams { gamma: 1e-9 };
        for snr in [1e-4, 1e-3, 1e-2] {
            let p = peaky_mutual_info(&pp, 2.0, snr).unwrap();
            let np = optimize_training(snr.powf(-2.0), snr).unwrap().bound_bits;
            assert!((p / np - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn peaky_outside_low_snr() {
        let pp = PeakyParams::new(0.5).unwrap();
        assert!(matches!(peaky_mutual_info(&pp, 2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn peaky_performs_like_physical_coherence() {
        // With N_coh = snr^{-(μ-γ)} the peaky scheme tracks the non-peaky
        // curve at exponent μ, not μ - γ.
        let grid = default_grid();
        let pp = PeakyParams::new(0.5).unwrap();
        let peaky: Vec<f64> = grid.iter().map(|&s| peaky_mutual_info(&pp, 2.0, s).unwrap()).collect();
        let powers = [1.0, 1.5];
        let fp = fit_expansion(&grid, &peaky, &powers, FitSource::OptimizedBound).unwrap();
        let at = |mu: f64| {
            let v = training_bound_curve(mu, &grid).unwrap();
            fit_expansion(&grid, &v, &powers, FitSource::OptimizedBound).unwrap().c1
        };
        let (c_mu, c_reduced) = (at(2.0), at(1.5));
        assert!((fp.c1 - c_mu).abs() < (fp.c1 - c_reduced).abs());
        assert!((fp.c1 / c_mu - 1.0).abs() < 0.02);
    }

    #[test]
    fn peakiness_helps_at_fixed_coherence() {
        // Physical coherence fixed at N_coh = snr^{-1.2}.
        let grid = default_grid();
        let mut prev = f64::NEG_INFINITY;
        for gamma in [0.05, 0.2, 0.4, 0.6] {
            let pp = PeakyParams::new(gamma).unwrap();
            let v: Vec<f64> = grid.iter().map(|&s| peaky_mutual_info(&pp, 1.2 + gamma, s).unwrap()).collect();
            let c1 = fit_capacity_coefficients(&grid, &v, FitSource::OptimizedBound).unwrap().c1;
            assert!(c1 >= prev, "gamma {gamma}: {c1} < {prev}");
            prev = c1;
        }
    }

    #[test]
    fn region_examples() {
        let v = classify_region(0.1, 0.3, 1.0).unwrap();
        assert_eq!(v.favorable, Scheme::NpTs);
        assert!((v.np_ts_exponent.unwrap() - 2.3 / 0.9).abs() < 1e-12);
        assert!(v.np_ts_exponent.unwrap() < 3.0);
        assert_eq!(classify_region(0.1, 0.3, 0.0).unwrap().favorable, Scheme::NpTs);

        let v = classify_region(0.3, 0.4, 0.0).unwrap();
        assert_eq!(v.favorable, Scheme::NpTs);
        assert!(v.np_ts_exponent.unwrap() < 1.0);
        let v = classify_region(0.3, 0.4, 1.0).unwrap();
        assert_eq!(v.favorable, Scheme::PTs);
        assert!((v.np_ts_exponent.unwrap() - 2.4 / 0.7).abs() < 1e-12);

        let v = classify_region(0.8, 0.9, 0.0).unwrap();
        assert_eq!(v.favorable, Scheme::PTs);
        assert!(v.np_ts_exponent.unwrap() > 1.0);
        assert_eq!(classify_region(0.8, 0.9, 1.0).unwrap().favorable, Scheme::PTs);

        assert_eq!(classify_region(0.5, 0.5, 0.0).unwrap().favorable, Scheme::Tie);
        let v = classify_region(1.0, 0.2, 0.0).unwrap();
        assert_eq!(v.favorable, Scheme::PTs);
        assert!(v.np_ts_exponent.is_none() && v.note.is_some());
        assert!(classify_region(-0.1, 0.2, 0.0).is_err());
    }

    #[test]
    fn peaky_exponents() {
        let p = ChannelParams::new(1e-5, 50.0, 0.3, 0.4).unwrap();
        let PeakyDuration::Exponent { exponent } = peaky_duration_exponent(&p, 1.5, 0.0).unwrap() else {
            panic!("expected exponent");
        };
        assert!((exponent - (1.5 + 0.4 - 1.0) / 0.7).abs() < 1e-15);

        let rich_doppler = ChannelParams::new(1e-5, 50.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            peaky_duration_exponent(&rich_doppler, 1.2, 0.8).unwrap(),
            PeakyDuration::Feasible { .. }
        ));
        assert!(matches!(
            peaky_duration_exponent(&rich_doppler, 1.2, 0.6).unwrap(),
            PeakyDuration::Infeasible { .. }
        ));
        for gamma in [0.0, 0.5, 0.999] {
            assert!(matches!(
                peaky_duration_exponent(&rich_doppler, 3.0, gamma).unwrap(),
                PeakyDuration::Infeasible { .. }
            ));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn region_verdict_consistent(d1 in 0.0f64..0.999, d2 in 0.0f64..=1.0, eps in 0.0f64..2.0) {
            let v = classify_region(d1, d2, eps).unwrap();
            let np_better = v.np_ts_exponent.unwrap() < v.p_ts_exponent;
            let oracle = (1.0 + 2.0 * eps) * d1 + d2 < 1.0;
            prop_assert_eq!(v.favorable == Scheme::NpTs, oracle);
            if (((1.0 + 2.0 * eps) * d1 + d2) - 1.0).abs() > 1e-9 {
                prop_assert_eq!(np_better, oracle);
            }
        }
    }
}
