use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretizer::{DEFAULT_COVERAGE_SIGMAS, DEFAULT_EPSILON};
use crate::gaussian_state::{AmplifierParams, SqueezeParams};
use crate::measures::MeasureKind;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level experiment description, read from TOML.
///
/// ```toml
/// schema_version = 1
/// grids = [5, 9, 17, 33]
/// negativity_grids = [13, 17, 23, 33]
///
/// [amplifier]
/// omega_a = 1.0
/// omega_b = 3.0
/// omega_pump = 5.0
/// kappa = 2.0
/// detuning_override = 9.0
///
/// [squeeze]
/// beta = 0.05
///
/// [time]
/// periods = 1.0
/// samples = 64
///
/// [[measures]]
/// kind = "von_neumann"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub amplifier: AmplifierConfig,
    pub squeeze: SqueezeConfig,
    pub time: TimeConfig,
    /// Points per mode for the entropy and covariance sweeps.
    pub grids: Vec<usize>,
    pub measures: Vec<MeasureKind>,
    /// Points per mode for the bipartite log-negativity run; falls back to
    /// `grids` when empty.
    #[serde(default)]
    pub negativity_grids: Vec<usize>,
    #[serde(default = "default_coverage")]
    pub coverage_sigmas: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_island: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierConfig {
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_pump: f64,
    pub kappa: f64,
    /// Replaces `omega_pump - omega_a - omega_b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_override: Option<f64>,
    /// Replaces `sqrt(detuning^2 / 4 - kappa^2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_override: Option<f64>,
}

/// Either `beta` (with optional `beta_im`) or `r` (with optional `phi`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

/// `samples` equally spaced times from `start` to the end point inclusive.
/// The end point is `stop`, or `start + periods * pi / nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub start: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<f64>,
    pub samples: usize,
}

fn default_coverage() -> f64 {
    DEFAULT_COVERAGE_SIGMAS
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Reference setup: `omega_a = 1`, `omega_b = 3`, `omega = 5`,
    /// `kappa = 2`, detuning 9, `beta = 1/20`, one period in 64 samples.
    pub fn reference() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            amplifier: AmplifierConfig {
                omega_a: 1.0,
                omega_b: 3.0,
                omega_pump: 5.0,
                kappa: 2.0,
                detuning_override: Some(9.0),
                nu_override: None,
            },
            squeeze: SqueezeConfig {
                beta: Some(0.05),
                ..SqueezeConfig::default()
            },
            time: TimeConfig {
                start: 0.0,
                stop: None,
                periods: Some(1.0),
                samples: 64,
            },
            grids: vec![5, 9, 17, 33],
            measures: vec![
                MeasureKind::Tsallis { q: 5.0 },
                MeasureKind::VonNeumann,
                MeasureKind::Linear,
                MeasureKind::LogNegativity,
            ],
            negativity_grids: vec![13, 17, 23, 33],
            coverage_sigmas: DEFAULT_COVERAGE_SIGMAS,
            epsilon_island: DEFAULT_EPSILON,
            output_dir: default_output_dir(),
        }
    }

    /// Parses and validates. Errors are [`Error::Config`] and carry the
    /// TOML line and field where available.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.params()?;
        self.squeeze_params()?;
        self.end_time()?;
        if self.time.samples < 2 {
            return Err(config_err(format!("time.samples must be >= 2, got {}", self.time.samples)));
        }
        if self.grids.is_empty() {
            return Err(config_err("grids must not be empty"));
        }
        for (field, list) in [("grids", &self.grids), ("negativity_grids", &self.negativity_grids)] {
            if let Some(&n) = list.iter().find(|&&n| n < 3 || n % 2 == 0) {
                return Err(config_err(format!("{field}: {n} points per mode; need an odd count >= 3")));
            }
        }
        if self.measures.is_empty() {
            return Err(config_err("measures must not be empty"));
        }
        for m in &self.measures {
            m.validate().map_err(|e| config_err(format!("measures: {e}")))?;
        }
        if !(self.coverage_sigmas > 0.0) || !self.coverage_sigmas.is_finite() {
            return Err(config_err(format!("coverage_sigmas must be > 0, got {}", self.coverage_sigmas)));
        }
        if !(self.epsilon_island > 0.0) || !self.epsilon_island.is_finite() {
            return Err(config_err(format!("epsilon_island must be > 0, got {}", self.epsilon_island)));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<AmplifierParams> {
        let a = &self.amplifier;
        AmplifierParams::with_overrides(a.omega_a, a.omega_b, a.omega_pump, a.kappa, a.detuning_override, a.nu_override)
            .map_err(|e| config_err(format!("amplifier: {e}")))
    }

    pub fn squeeze_params(&self) -> Result<SqueezeParams> {
        let s = &self.squeeze;
        let result = match (s.beta, s.r) {
            (Some(re), None) if s.phi.is_none() => SqueezeParams::from_beta(Complex64::new(re, s.beta_im.unwrap_or(0.0))),
            (None, Some(r)) if s.beta_im.is_none() => SqueezeParams::new(r, s.phi.unwrap_or(0.0)),
            _ => return Err(config_err("squeeze: give either beta (and beta_im) or r (and phi)")),
        };
        result.map_err(|e| config_err(format!("squeeze: {e}")))
    }

    fn end_time(&self) -> Result<f64> {
        let t = &self.time;
        let stop = match (t.stop, t.periods) {
            (Some(stop), None) => stop,
            (None, Some(periods)) => t.start + periods * self.params()?.period(),
            _ => return Err(config_err("time: give exactly one of stop and periods")),
        };
        if !t.start.is_finite() || !stop.is_finite() || !(stop > t.start) {
            return Err(config_err(format!("time: need start < stop, got {} and {stop}", t.start)));
        }
        Ok(stop)
    }

    /// Inclusive linspace over the configured window.
    pub fn times(&self) -> Result<Vec<f64>> {
        let start = self.time.start;
        let stop = self.end_time()?;
        let last = (self.time.samples - 1) as f64;
        Ok((0..self.time.samples)
            .map(|k| start + (stop - start) * (k as f64 / last))
            .collect())
    }

    pub fn negativity_grids(&self) -> &[usize] {
        if self.negativity_grids.is_empty() {
            &self.grids
        } else {
            &self.negativity_grids
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE_TOML: &str = include_str!("../../../../configs/reference.toml");

    #[test]
    fn shipped_config_is_the_reference_setup() {
        let parsed = ExperimentConfig::from_toml_str(REFERENCE_TOML).unwrap();
        assert_eq!(parsed, ExperimentConfig::reference());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::reference();
        assert_eq!(ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn times_are_inclusive() {
        let c = ExperimentConfig::reference();
        let t = c.times().unwrap();
        assert_eq!(t.len(), 64);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[63], c.params().unwrap().period());
    }

    fn with(edit: impl FnOnce(&mut ExperimentConfig)) -> Result<()> {
        let mut c = ExperimentConfig::reference();
        edit(&mut c);
        ExperimentConfig::from_toml_str(&c.to_toml_string()).map(|_| ())
    }

    #[test]
    fn rejects_bad_values() {
        type Edit = Box<dyn FnOnce(&mut ExperimentConfig)>;
        let cases: Vec<Edit> = vec![
            Box::new(|c| c.schema_version = 2),
            Box::new(|c| c.amplifier.kappa = -2.0),
            Box::new(|c| c.time.samples = 1),
            Box::new(|c| c.grids.clear()),
            Box::new(|c| c.grids = vec![4]),
            Box::new(|c| c.measures = vec![MeasureKind::Tsallis { q: 1.0 }]),
            Box::new(|c| c.squeeze.r = Some(0.1)),
            Box::new(|c| c.time.stop = Some(1.0)),
            Box::new(|c| c.coverage_sigmas = 0.0),
        ];
        for edit in cases {
            assert!(matches!(with(edit), Err(Error::Config(_))));
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = REFERENCE_TOML.replace("schema_version = 1", "schema_version = 1\nextra = 1");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
        let text = REFERENCE_TOML.replace("kappa = 2.0", "kappa = 2.0\nkapa = 2.0");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = REFERENCE_TOML.replace("kind = \"linear\"", "kind = \"linear\"\nq = 2.0");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = format!("{REFERENCE_TOML}\nextra = 1\n");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = REFERENCE_TOML.replace("q = 5.0", "");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = ExperimentConfig::from_toml_str("schema_version = 1\ngrids = [5,\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn r_and_phi_form() {
        let mut c = ExperimentConfig::reference();
        c.squeeze = SqueezeConfig {
            r: Some(0.05_f64.atanh()),
            phi: Some(std::f64::consts::PI),
            ..SqueezeConfig::default()
        };
        let s = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap().squeeze_params().unwrap();
        assert!((s.beta() - Complex64::new(0.05, 0.0)).norm() < 1e-15);
    }
}
