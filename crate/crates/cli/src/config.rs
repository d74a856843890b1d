use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use uwbcap_core::numerics::{linear_grid, log_grid};
use uwbcap_core::{ChannelParams, SignalingParams};

use crate::CliError;

pub const MIN_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CoherenceSweep,
    EstimationSweep,
    CoefficientFit,
    ScalingRegions,
    McValidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub variable: String,
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl SweepAxis {
    fn new(variable: &str, scale: Scale, min: f64, max: f64, points: usize) -> Self {
        Self { variable: variable.into(), scale, min, max, points }
    }

    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.points < 2 || !(self.min < self.max) {
            return Err(CliError::Config(format!(
                "sweep '{}' needs points >= 2 and min < max",
                self.variable
            )));
        }
        let v = match self.scale {
            Scale::Log => log_grid(self.min, self.max, self.points),
            Scale::Linear => linear_grid(self.min, self.max, self.points),
        };
        v.map_err(|e| CliError::Config(e.to_string()))
    }

    fn expect_variable(&self, name: &str) -> Result<(), CliError> {
        if self.variable != name {
            return Err(CliError::Config(format!(
                "this experiment sweeps '{name}', config names '{}'",
                self.variable
            )));
        }
        Ok(())
    }
}

/// One run's fully resolved parameters. The sweep axis meaning depends on
/// the experiment; `snr_grid` is the fitting or validation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub channel: ChannelParams,
    pub signaling: SignalingParams,
    pub sweep: SweepAxis,
    pub mu_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub snr_grid: SweepAxis,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
}

const TOLERANCE_KEYS: [&str; 5] = ["c1_rel", "c2_rel", "eta_limit", "mse_limit", "mc_sigma"];

fn default_tolerances() -> BTreeMap<String, f64> {
    [("c1_rel", 0.01), ("c2_rel", 0.15), ("eta_limit", 0.02), ("mse_limit", 0.01), ("mc_sigma", 4.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

impl ExperimentConfig {
    pub fn default_for(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            channel: ChannelParams { delay_spread_s: 1e-5, doppler_spread_hz: 0.1, delta1: 0.5, delta2: 0.5 },
            signaling: SignalingParams { duration_s: 1e-3, bandwidth_hz: 1e9, power_hz: 1e3 },
            sweep: SweepAxis::new("delta2", Scale::Linear, 0.0, 1.0, 21),
            mu_values: vec![0.7, 1.0, 1.3],
            epsilon_values: vec![0.0, 1.0],
            snr_grid: SweepAxis::new("snr", Scale::Log, 1e-4, 1e-2, 12),
            trials: 1_000_000,
            seed: 20_080_419,
            tolerances: default_tolerances(),
            output_path: None,
        };
        match experiment {
            Experiment::CoherenceSweep => Self {
                channel: ChannelParams { delay_spread_s: 1e-5, doppler_spread_hz: 50.0, delta1: 0.5, delta2: 0.5 },
                signaling: SignalingParams { duration_s: 1e-3, bandwidth_hz: 5e7, power_hz: 1e3 },
                ..base
            },
            Experiment::EstimationSweep => Self {
                sweep: SweepAxis::new("bandwidth_hz", Scale::Log, 1e6, 1e11, 21),
                ..base
            },
            Experiment::CoefficientFit => Self {
                sweep: SweepAxis::new("duration_s", Scale::Log, 1e-9, 1e27, 37),
                mu_values: vec![],
                ..base
            },
            Experiment::ScalingRegions => Self {
                sweep: SweepAxis::new("delta", Scale::Linear, 0.0, 1.0, 101),
                mu_values: vec![],
                ..base
            },
            Experiment::McValidate => Self {
                mu_values: vec![1.5, 3.0],
                snr_grid: SweepAxis::new("snr", Scale::Log, 1e-4, 1e-1, 4),
                ..base
            },
        }
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances[key]
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: uwbcap_core::Error| CliError::Config(e.to_string());
        self.channel.validate().map_err(cfg)?;
        self.signaling.validate().map_err(cfg)?;
        self.sweep.values()?;
        self.snr_grid.values()?;
        if self.mu_values.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(CliError::Config("mu values must be positive".into()));
        }
        if self.epsilon_values.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
            return Err(CliError::Config("epsilon values must be >= 0".into()));
        }
        for key in self.tolerances.keys() {
            if !TOLERANCE_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("unknown tolerance '{key}'")));
            }
        }
        for key in TOLERANCE_KEYS {
            match self.tolerances.get(key) {
                Some(v) if *v > 0.0 && v.is_finite() => {}
                _ => return Err(CliError::Config(format!("tolerance '{key}' must be positive"))),
            }
        }
        match self.experiment {
            Experiment::CoherenceSweep => self.sweep.expect_variable("delta2")?,
            Experiment::EstimationSweep => {
                self.sweep.expect_variable("bandwidth_hz")?;
                if self.mu_values.is_empty() {
                    return Err(CliError::Config("estimation sweep needs at least one mu".into()));
                }
            }
            Experiment::CoefficientFit => self.sweep.expect_variable("duration_s")?,
            Experiment::ScalingRegions => {
                self.sweep.expect_variable("delta")?;
                if self.sweep.min < 0.0 || self.sweep.max > 1.0 {
                    return Err(CliError::Config("delta sweep must lie in [0, 1]".into()));
                }
            }
            Experiment::McValidate => {
                if self.trials < MIN_TRIALS {
                    return Err(CliError::Config(format!(
                        "Monte Carlo needs trials >= {MIN_TRIALS}, got {}",
                        self.trials
                    )));
                }
            }
        }
        Ok(())
    }

    /// Defaults for `experiment` overlaid with the JSON document at `path`.
    /// Objects merge key by key; any other value replaces the default.
    pub fn load(experiment: Experiment, path: Option<&Path>) -> Result<Self, CliError> {
        let mut value = serde_json::to_value(Self::default_for(experiment)).expect("config serializes");
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let user: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if !user.is_object() {
                return Err(CliError::Config("config must be a JSON object".into()));
            }
            merge(&mut value, user);
        }
        let config: Self = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        if config.experiment != experiment {
            return Err(CliError::Config(format!(
                "config is for {:?}, subcommand runs {experiment:?}",
                config.experiment
            )));
        }
        Ok(config)
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for e in Experiment::value_variants() {
            ExperimentConfig::default_for(*e).validate().unwrap();
        }
    }

    #[test]
    fn merge_overrides_nested_fields() {
        let mut base = serde_json::json!({"a": {"x": 1, "y": 2}, "b": [1, 2]});
        merge(&mut base, serde_json::json!({"a": {"y": 3}, "b": [5]}));
        assert_eq!(base, serde_json::json!({"a": {"x": 1, "y": 3}, "b": [5]}));
    }

    #[test]
    fn rejects_bad_sweeps() {
        let mut c = ExperimentConfig::default_for(Experiment::CoherenceSweep);
        c.sweep.points = 1;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default_for(Experiment::CoherenceSweep);
        c.sweep.min = 2.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default_for(Experiment::McValidate);
        c.trials = 999;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default_for(Experiment::McValidate);
        c.tolerances.insert("bogus".into(), 1.0);
        assert!(c.validate().is_err());
    }
}
