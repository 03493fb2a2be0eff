use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use pfcircuit_core::dynamics::{AdjointUnits, DerivativeConvention, TimeGrid, DEFAULT_RK4_STEP, DEFAULT_SAMPLES, DEFAULT_TAU_MAX};
use pfcircuit_core::pfalgebra::Gauge;
use pfcircuit_core::{CircuitParams, ModelOptions};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Normalized,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Inclusive, evenly spaced range `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + i as f64 * step })
            .collect()
    }
}

impl std::str::FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got `{s}`"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        let count = parts[2].trim().parse::<usize>().map_err(|e| format!("`{}`: {e}", parts[2]))?;
        if count == 0 {
            return Err("range count must be at least 1".into());
        }
        Ok(Range { start: num(parts[0])?, stop: num(parts[1])?, count })
    }
}

/// Everything a run needs. Field names double as the JSON config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RunConfig {
    pub mode: Mode,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub L: Option<f64>,
    pub C: Option<f64>,
    pub R: Option<f64>,
    pub M: Option<f64>,
    pub i1: f64,
    pub gauge: Gauge,
    pub tau_max: f64,
    pub samples: usize,
    pub rk4_step: f64,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
    pub convention: DerivativeConvention,
    pub adjoint_units: AdjointUnits,
    pub mu_range: Range,
    pub gamma_range: Range,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Normalized,
            mu: None,
            gamma: None,
            L: None,
            C: None,
            R: None,
            M: None,
            i1: 1.0,
            gauge: Gauge::unit(),
            tau_max: DEFAULT_TAU_MAX,
            samples: DEFAULT_SAMPLES,
            rk4_step: DEFAULT_RK4_STEP,
            output_dir: None,
            format: Format::Csv,
            convention: DerivativeConvention::OmegaScaled,
            adjoint_units: AdjointUnits::Strict,
            mu_range: Range { start: 0.1, stop: 0.9, count: 9 },
            gamma_range: Range { start: 1.0, stop: 5.0, count: 9 },
            seed: 20,
        }
    }
}

pub const DEFAULT_MU: f64 = 0.5;
pub const DEFAULT_GAMMA: f64 = 3.0;

fn parse_gauge(s: &str) -> Result<Gauge, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    let arr: [f64; 4] = v.try_into().map_err(|_| "gauge needs four comma-separated values".to_string())?;
    Ok(Gauge { t21: arr[0], t22: arr[1], t23: arr[2], t24: arr[3] })
}

/// Flags shared by every command. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with `RunConfig` fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Inductance L (physical mode)
    #[arg(long, global = true)]
    pub inductance: Option<f64>,
    /// Capacitance C (physical mode)
    #[arg(long, global = true)]
    pub capacitance: Option<f64>,
    /// Resistance R (physical mode)
    #[arg(long, global = true)]
    pub resistance: Option<f64>,
    /// Mutual inductance M (physical mode)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mutual: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub i1: Option<f64>,
    /// t21,t22,t23,t24
    #[arg(long, global = true, value_parser = parse_gauge, allow_hyphen_values = true)]
    pub gauge: Option<Gauge>,
    #[arg(long, global = true)]
    pub tau_max: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub rk4_step: Option<f64>,
    /// Directory for output files; stdout when absent
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    pub convention: Option<ConventionArg>,
    #[arg(long, global = true, value_enum)]
    pub adjoint_units: Option<UnitsArg>,
    /// start:stop:count
    #[arg(long, global = true)]
    pub mu_range: Option<Range>,
    /// start:stop:count
    #[arg(long, global = true)]
    pub gamma_range: Option<Range>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    OmegaScaled,
    Verbatim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Strict,
    Extended,
}

fn read_file(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => read_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($field:ident, $val:expr) => {
                if let Some(v) = $val {
                    c.$field = v;
                }
            };
        }
        set!(mode, self.mode);
        if self.mu.is_some() {
            c.mu = self.mu;
        }
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        if self.inductance.is_some() {
            c.L = self.inductance;
        }
        if self.capacitance.is_some() {
            c.C = self.capacitance;
        }
        if self.resistance.is_some() {
            c.R = self.resistance;
        }
        if self.mutual.is_some() {
            c.M = self.mutual;
        }
        set!(i1, self.i1);
        set!(gauge, self.gauge);
        set!(tau_max, self.tau_max);
        set!(samples, self.samples);
        set!(rk4_step, self.rk4_step);
        if self.output.is_some() {
            c.output_dir = self.output.clone();
        }
        set!(format, self.format);
        set!(
            convention,
            self.convention.map(|v| match v {
                ConventionArg::OmegaScaled => DerivativeConvention::OmegaScaled,
                ConventionArg::Verbatim => DerivativeConvention::Verbatim,
            })
        );
        set!(
            adjoint_units,
            self.adjoint_units.map(|v| match v {
                UnitsArg::Strict => AdjointUnits::Strict,
                UnitsArg::Extended => AdjointUnits::Extended,
            })
        );
        set!(mu_range, self.mu_range);
        set!(gamma_range, self.gamma_range);
        set!(seed, self.seed);
        c.check()?;
        Ok(c)
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        let physical = [self.L, self.C, self.R, self.M];
        match self.mode {
            Mode::Normalized => {
                if physical.iter().any(Option::is_some) {
                    return Err(ConfigError("L, C, R, M are only allowed in physical mode".into()));
                }
            }
            Mode::Physical => {
                if self.mu.is_some() || self.gamma.is_some() {
                    return Err(ConfigError("mu and gamma are only allowed in normalized mode".into()));
                }
                if physical.iter().any(Option::is_none) {
                    return Err(ConfigError("physical mode needs L, C, R and M".into()));
                }
            }
        }
        if self.samples < 2 {
            return Err(ConfigError(format!("samples must be at least 2, got {}", self.samples)));
        }
        if !(self.tau_max > 0.0) || !self.tau_max.is_finite() {
            return Err(ConfigError(format!("tau_max must be positive, got {}", self.tau_max)));
        }
        if !(self.rk4_step > 0.0) {
            return Err(ConfigError(format!("rk4_step must be positive, got {}", self.rk4_step)));
        }
        if !self.i1.is_finite() {
            return Err(ConfigError("i1 must be finite".into()));
        }
        self.gauge.check().map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    pub fn params(&self) -> CircuitParams {
        match self.mode {
            Mode::Normalized => CircuitParams::normalized(
                self.mu.unwrap_or(DEFAULT_MU),
                self.gamma.unwrap_or(DEFAULT_GAMMA),
                self.i1,
            ),
            // presence is checked in `check`
            Mode::Physical => CircuitParams {
                inductance: self.L.unwrap_or(f64::NAN),
                capacitance: self.C.unwrap_or(f64::NAN),
                resistance: self.R.unwrap_or(f64::NAN),
                mutual_inductance: self.M.unwrap_or(f64::NAN),
                initial_current: self.i1,
            },
        }
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions { gauge: self.gauge, convention: self.convention }
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        TimeGrid::uniform(self.tau_max, self.samples).map_err(|e| ConfigError(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: Range = "0.1:0.9:9".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[8], 0.9);
        assert!("1:2".parse::<Range>().is_err());
        assert!("1:2:0".parse::<Range>().is_err());
    }

    #[test]
    fn modes_are_exclusive() {
        let mut c = RunConfig { L: Some(1.0), ..RunConfig::default() };
        assert!(c.check().is_err());
        c.mode = Mode::Physical;
        assert!(c.check().is_err());
        c.C = Some(1.0);
        c.R = Some(0.5);
        c.M = Some(0.2);
        assert!(c.check().is_ok());
        c.mu = Some(0.5);
        assert!(c.check().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c: RunConfig = serde_json::from_str(r#"{"mu": 0.4, "gamma": 2.5, "gauge": {"t21": 2, "t22": 1, "t23": 1, "t24": 1}}"#).unwrap();
        assert_eq!(c.params().mutual_inductance, 0.4);
        assert_eq!(c.gauge.t21, 2.0);
        assert_eq!(c.samples, 1001);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn gauge_flag() {
        assert_eq!(parse_gauge("2,0.5,3,1").unwrap().as_array(), [2.0, 0.5, 3.0, 1.0]);
        assert!(parse_gauge("1,2").is_err());
    }
}
