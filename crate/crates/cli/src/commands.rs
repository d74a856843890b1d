use rayon::prelude::*;
use serde::Serialize;
use uwbcap_core::asymptotics::{classify_region, theorem1_coefficient_check, Classification, CoefficientTolerances};
use uwbcap_core::capacity::{coherent_bounds, coherent_capacity, mc_coherent_capacity};
use uwbcap_core::channel::{coherence_geometry, required_duration};
use uwbcap_core::training::{mc_training_bound, optimize_training};
use uwbcap_core::{ChannelParams, RngStream, Scheme, SignalingParams, LOG2_E};

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{csv_table, num, opt_num, to_json};
use crate::CliError;

/// A result-level assertion; a failed check maps to exit code 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub primary: String,
    /// File extension and body of an auxiliary output.
    pub secondary: Option<(String, String)>,
    pub checks: Vec<Check>,
}

pub fn run(config: &ExperimentConfig) -> Result<Report, CliError> {
    match config.experiment {
        Experiment::CoherenceSweep => coherence_sweep(config),
        Experiment::EstimationSweep => estimation_sweep(config),
        Experiment::CoefficientFit => coefficient_fit(config),
        Experiment::ScalingRegions => scaling_regions(config),
        Experiment::McValidate => mc_validate(config),
    }
}

/// The config as embedded in JSON reports; the output location is left out
/// so reports do not depend on where they are written.
fn embedded(config: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig { output_path: None, ..config.clone() }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn coherence_sweep(config: &ExperimentConfig) -> Result<Report, CliError> {
    let deltas = config.sweep.values()?;
    let geoms = deltas
        .iter()
        .map(|&delta2| {
            let params = ChannelParams { delta2, ..config.channel };
            params.validate()?;
            coherence_geometry(&params, &config.signaling)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = deltas
        .iter()
        .zip(&geoms)
        .map(|(d, g)| vec![num(*d), num(g.coherence_time_s), num(g.coherence_bandwidth_hz), num(g.coherence_dim)])
        .collect();

    let w = config.signaling.bandwidth_hz;
    let tm = config.channel.delay_spread_s;
    let wcoh: Vec<f64> = geoms.iter().map(|g| g.coherence_bandwidth_hz).collect();
    let mut checks = Vec::new();
    if w * tm > 1.0 {
        checks.push(Check::new(
            "w_coh_decreasing",
            wcoh.windows(2).all(|p| p[1] < p[0]),
            "W_coh strictly decreasing in delta2",
        ));
    }
    if deltas[0] == 0.0 {
        checks.push(Check::new("w_coh_at_zero", rel_err(wcoh[0], w) < 1e-12, format!("{} vs W = {w}", wcoh[0])));
    }
    if *deltas.last().unwrap() == 1.0 {
        let last = *wcoh.last().unwrap();
        checks.push(Check::new("w_coh_at_one", rel_err(last, 1.0 / tm) < 1e-12, format!("{last} vs 1/Tm = {}", 1.0 / tm)));
    }
    Ok(Report {
        primary: csv_table(&["delta2", "T_coh_s", "W_coh_hz", "N_coh"], &rows)?,
        secondary: None,
        checks,
    })
}

#[derive(Debug, Clone)]
struct EstimationRow {
    mu: f64,
    w: f64,
    t: f64,
    snr: f64,
    n_coh: f64,
    design: Option<(f64, f64)>,
}

pub fn estimation_sweep(config: &ExperimentConfig) -> Result<Report, CliError> {
    let ws = config.sweep.values()?;
    let p = config.signaling.power_hz;
    let points: Vec<(f64, f64)> = config.mu_values.iter().flat_map(|&mu| ws.iter().map(move |&w| (mu, w))).collect();
    let rows = points
        .par_iter()
        .map(|&(mu, w)| -> Result<EstimationRow, CliError> {
            let t = required_duration(&config.channel, w, p, mu)?;
            let g = coherence_geometry(&config.channel, &SignalingParams::new(t, w, p)?)?;
            let design = if g.coherence_dim > 2.0 {
                let d = optimize_training(g.coherence_dim, g.snr)?;
                Some((d.eta_star, d.mse))
            } else {
                None
            };
            Ok(EstimationRow { mu, w, t, snr: g.snr, n_coh: g.coherence_dim, design })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.mu),
                num(r.w),
                num(r.t),
                num(r.snr),
                num(r.n_coh),
                opt_num(r.design.map(|d| d.0)),
                opt_num(r.design.map(|d| d.1)),
                if r.design.is_some() { "ok" } else { "lemma2_out_of_domain" }.into(),
            ]
        })
        .collect();

    // Checks at the widest bandwidth.
    let w_max = *ws.last().unwrap();
    let at_max: Vec<&EstimationRow> = rows.iter().filter(|r| r.w == w_max && r.design.is_some()).collect();
    let eta_limit = config.tolerance("eta_limit");
    let mse_limit = config.tolerance("mse_limit");
    let mut checks = Vec::new();
    for r in &at_max {
        let (eta, mse) = r.design.unwrap();
        if r.mu < 1.0 {
            checks.push(Check::new(
                &format!("eta_half_mu_{}", r.mu),
                (eta - 0.5).abs() <= eta_limit,
                format!("eta* = {eta} at W = {w_max}"),
            ));
        } else if r.mu == 1.0 {
            checks.push(Check::new(
                "mse_unit_mu",
                (mse - std::f64::consts::FRAC_1_SQRT_2).abs() <= mse_limit,
                format!("mse = {mse} at W = {w_max}"),
            ));
        }
    }
    if let Some(top) = at_max.iter().max_by(|a, b| a.mu.total_cmp(&b.mu)) {
        if at_max.len() > 1 {
            let (eta, mse) = top.design.unwrap();
            let best = at_max.iter().all(|r| r.mu == top.mu || (eta < r.design.unwrap().0 && mse < r.design.unwrap().1));
            checks.push(Check::new(
                "largest_mu_best_estimation",
                best,
                format!("mu = {} has the smallest eta* and mse at W = {w_max}", top.mu),
            ));
        }
    }
    Ok(Report {
        primary: csv_table(&["mu", "W_hz", "T_s", "snr", "N_coh", "eta_star", "mse", "status"], &table)?,
        secondary: None,
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
struct CorrectionEntry {
    power: f64,
    fitted: f64,
    reference: f64,
}

#[derive(Debug, Clone, Serialize)]
struct FitEntry {
    #[serde(rename = "T_s")]
    t_s: f64,
    mu_eff: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    correction: Option<CorrectionEntry>,
    residual_rms: Option<f64>,
    classification: Option<Classification>,
    first_order_fails: Option<bool>,
    error: Option<String>,
}

#[derive(Serialize)]
struct FitReport {
    config: ExperimentConfig,
    lambda1: f64,
    lambda2: f64,
    entries: Vec<FitEntry>,
}

pub fn coefficient_fit(config: &ExperimentConfig) -> Result<Report, CliError> {
    let ts = config.sweep.values()?;
    let grid = config.snr_grid.values()?;
    let tol = CoefficientTolerances { c1_rel: config.tolerance("c1_rel"), c2_rel: config.tolerance("c2_rel") };
    let sig = config.signaling;
    let entries: Vec<FitEntry> = ts
        .par_iter()
        .map(|&t| {
            let mut e = FitEntry {
                t_s: t,
                mu_eff: None,
                c1: None,
                c2: None,
                correction: None,
                residual_rms: None,
                classification: None,
                first_order_fails: None,
                error: None,
            };
            let outcome = SignalingParams::new(t, sig.bandwidth_hz, sig.power_hz)
                .and_then(|s| coherence_geometry(&config.channel, &s))
                .and_then(|g| {
                    let mu = g.mu_eff.ok_or_else(|| uwbcap_core::Error::Domain("mu_eff undefined".into()))?;
                    e.mu_eff = Some(mu);
                    theorem1_coefficient_check(mu, &grid, &tol)
                });
            match outcome {
                Ok(c) => {
                    e.c1 = Some(c.fit.c1);
                    e.c2 = c.fit.c2;
                    e.correction = c.correction.map(|k| CorrectionEntry { power: k.power, fitted: k.fitted, reference: k.reference });
                    e.residual_rms = Some(c.fit.residual_rms);
                    e.first_order_fails = Some(c.classification == Classification::FirstOrderFails);
                    e.classification = Some(c.classification);
                }
                Err(err) => e.error = Some(err.to_string()),
            }
            e
        })
        .collect();

    let mut checks = Vec::new();
    let sub_unit_flagged = entries
        .iter()
        .filter(|e| e.mu_eff.is_some_and(|m| m < 1.0) && e.error.is_none())
        .all(|e| e.first_order_fails == Some(true));
    checks.push(Check::new("sub_unit_mu_flagged", sub_unit_flagged, "every mu_eff < 1 entry fails first order"));
    let fitted = |pred: &dyn Fn(f64) -> bool| entries.iter().filter(|e| e.mu_eff.is_some_and(pred) && e.c1.is_some()).last();
    if let Some(e) = fitted(&|m| m > 1.0) {
        let err = rel_err(e.c1.unwrap(), LOG2_E);
        checks.push(Check::new("c1_limit", err < tol.c1_rel, format!("c1 rel. error {err:.3e} at T = {}", e.t_s)));
    }
    if let Some(e) = fitted(&|m| m > 3.0) {
        let err = e.c2.map(|c2| rel_err(c2, -LOG2_E)).unwrap_or(f64::INFINITY);
        checks.push(Check::new("c2_limit", err < tol.c2_rel, format!("c2 rel. error {err:.3e} at T = {}", e.t_s)));
    }
    let report = FitReport { config: embedded(config), lambda1: LOG2_E, lambda2: -LOG2_E, entries };
    Ok(Report { primary: to_json(&report), secondary: None, checks })
}

#[derive(Serialize)]
struct ReferenceCell {
    delta1: f64,
    delta2: f64,
    epsilon: f64,
    expected: Scheme,
    favorable: Scheme,
}

#[derive(Serialize)]
struct Boundaries {
    /// `δ1 + δ2 = 1`, the ε = 0 tie line.
    first_order: Vec<[f64; 2]>,
    /// `3δ1 + δ2 = 1`, the ε = 1 tie line.
    second_order: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct RegionReport {
    config: ExperimentConfig,
    boundaries: Boundaries,
    reference_cells: Vec<ReferenceCell>,
    counts: std::collections::BTreeMap<String, usize>,
    oracle_mismatches: usize,
}

const REFERENCE_CELLS: [(f64, f64, f64, Scheme); 6] = [
    (0.1, 0.3, 0.0, Scheme::NpTs),
    (0.1, 0.3, 1.0, Scheme::NpTs),
    (0.3, 0.4, 0.0, Scheme::NpTs),
    (0.3, 0.4, 1.0, Scheme::PTs),
    (0.8, 0.9, 0.0, Scheme::PTs),
    (0.8, 0.9, 1.0, Scheme::PTs),
];

fn scheme_label(s: Scheme) -> &'static str {
    match s {
        Scheme::NpTs => "NP_TS",
        Scheme::PTs => "P_TS",
        Scheme::Tie => "TIE",
    }
}

pub fn scaling_regions(config: &ExperimentConfig) -> Result<Report, CliError> {
    let deltas = config.sweep.values()?;
    let mut cells = Vec::with_capacity(config.epsilon_values.len() * deltas.len() * deltas.len());
    for &eps in &config.epsilon_values {
        for &d1 in &deltas {
            cells.extend(deltas.iter().map(|&d2| (d1, d2, eps)));
        }
    }
    let verdicts = cells
        .par_iter()
        .map(|&(d1, d2, eps)| classify_region(d1, d2, eps))
        .collect::<Result<Vec<_>, _>>()?;

    let mut counts = std::collections::BTreeMap::new();
    let mut mismatches = 0;
    let mut rows = Vec::with_capacity(verdicts.len());
    for v in &verdicts {
        let label = scheme_label(v.favorable);
        *counts.entry(format!("epsilon={}:{label}", v.epsilon)).or_insert(0) += 1;
        let lhs = (1.0 + 2.0 * v.epsilon) * v.delta1 + v.delta2;
        let oracle = if v.delta1 == 1.0 || lhs > 1.0 {
            Scheme::PTs
        } else if lhs < 1.0 {
            Scheme::NpTs
        } else {
            Scheme::Tie
        };
        mismatches += usize::from(oracle != v.favorable);
        rows.push(vec![
            num(v.delta1),
            num(v.delta2),
            num(v.epsilon),
            opt_num(v.np_ts_exponent),
            num(v.p_ts_exponent),
            label.to_string(),
        ]);
    }

    let reference_cells = REFERENCE_CELLS
        .iter()
        .map(|&(d1, d2, eps, expected)| {
            Ok(ReferenceCell { delta1: d1, delta2: d2, epsilon: eps, expected, favorable: classify_region(d1, d2, eps)?.favorable })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let n = config.sweep.points;
    let boundaries = Boundaries {
        first_order: (0..n).map(|i| i as f64 / (n - 1) as f64).map(|d1| [d1, 1.0 - d1]).collect(),
        second_order: (0..n).map(|i| i as f64 / (3 * (n - 1)) as f64).map(|d1| [d1, 1.0 - 3.0 * d1]).collect(),
    };
    let checks = vec![
        Check::new(
            "reference_cells",
            reference_cells.iter().all(|c| c.expected == c.favorable),
            "sparsity cases classified as expected",
        ),
        Check::new("inequality_oracle", mismatches == 0, format!("{mismatches} mismatching cells")),
    ];
    let report = RegionReport { config: embedded(config), boundaries, reference_cells, counts, oracle_mismatches: mismatches };
    Ok(Report {
        primary: csv_table(&["delta1", "delta2", "epsilon", "np_ts_exponent", "p_ts_exponent", "favorable"], &rows)?,
        secondary: Some(("json".into(), to_json(&report))),
        checks,
    })
}

#[derive(Serialize)]
struct TrainingCheck {
    mu: f64,
    #[serde(rename = "N_coh")]
    n_coh: f64,
    eta_star: f64,
    bound_bits: f64,
    mc_bits: f64,
    mc_std_error: f64,
    bound_below_mc: bool,
    mc_below_capacity: bool,
}

#[derive(Serialize)]
struct SnrCheck {
    snr: f64,
    closed_form_bits: f64,
    mc_bits: f64,
    mc_std_error: f64,
    mc_agrees: bool,
    low_snr_lower_bits: Option<f64>,
    low_snr_upper_bits: Option<f64>,
    low_snr_bounds_hold: Option<bool>,
    handbook_lower_bits: f64,
    handbook_upper_bits: f64,
    handbook_bounds_hold: bool,
    training: Vec<TrainingCheck>,
}

#[derive(Serialize)]
struct McReport {
    config: ExperimentConfig,
    points: Vec<SnrCheck>,
    all_pass: bool,
}

const LOW_SNR_B: f64 = 0.5;

pub fn mc_validate(config: &ExperimentConfig) -> Result<Report, CliError> {
    let snrs = config.snr_grid.values()?;
    let k = config.tolerance("mc_sigma");
    let root = RngStream::new(config.seed, 0);
    let mut points = Vec::with_capacity(snrs.len());
    for (i, &snr) in snrs.iter().enumerate() {
        let point = root.substream(i as u64);
        let closed = coherent_capacity(snr)?.bits_per_dim;
        let mc = mc_coherent_capacity(snr, config.trials, &point.substream(0))?;
        let (lo, hi) = match coherent_bounds(snr, LOW_SNR_B) {
            Ok((l, u)) => (Some(l.bits_per_dim), Some(u.bits_per_dim)),
            Err(_) => (None, None),
        };
        let hb_lo = 0.5 * (2.0 * snr).ln_1p() * LOG2_E;
        let hb_hi = snr.ln_1p() * LOG2_E;
        let mut training = Vec::new();
        for (j, &mu) in config.mu_values.iter().enumerate() {
            let n_coh = snr.powf(-mu);
            if !(n_coh > 2.0) {
                continue;
            }
            let d = optimize_training(n_coh, snr)?;
            let m = mc_training_bound(n_coh, snr, config.trials, &point.substream(1 + j as u64))?;
            training.push(TrainingCheck {
                mu,
                n_coh,
                eta_star: d.eta_star,
                bound_bits: d.bound_bits,
                mc_bits: m.bits_per_dim,
                mc_std_error: m.std_error,
                bound_below_mc: d.bound_bits <= m.bits_per_dim + k * m.std_error,
                mc_below_capacity: m.bits_per_dim <= closed + k * m.std_error,
            });
        }
        points.push(SnrCheck {
            snr,
            closed_form_bits: closed,
            mc_bits: mc.bits_per_dim,
            mc_std_error: mc.mc_std_error,
            mc_agrees: (mc.bits_per_dim - closed).abs() <= k * mc.mc_std_error,
            low_snr_lower_bits: lo,
            low_snr_upper_bits: hi,
            low_snr_bounds_hold: lo.zip(hi).map(|(l, u)| l <= closed && closed <= u),
            handbook_lower_bits: hb_lo,
            handbook_upper_bits: hb_hi,
            handbook_bounds_hold: hb_lo <= closed && closed <= hb_hi,
            training,
        });
    }
    let checks: Vec<Check> = points
        .iter()
        .map(|p| {
            let ok = p.mc_agrees
                && p.low_snr_bounds_hold.unwrap_or(true)
                && p.handbook_bounds_hold
                && p.training.iter().all(|t| t.bound_below_mc && t.mc_below_capacity);
            Check::new(&format!("sandwich_snr_{:e}", p.snr), ok, format!("{k} sigma tolerance"))
        })
        .collect();
    let all_pass = checks.iter().all(|c| c.passed);
    let report = McReport { config: embedded(config), points, all_pass };
    Ok(Report { primary: to_json(&report), secondary: None, checks })
}
