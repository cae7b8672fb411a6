//! Experiment and suite files (TOML). Unknown keys are rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chaoscast_core::dynamics::SystemId;
use chaoscast_core::esn::EsnConfig;
use chaoscast_core::lstm::LstmConfig;
use chaoscast_core::ngrc::NgrcConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(alias = "NGRC")]
    Ngrc,
    #[serde(alias = "RC")]
    Rc,
    #[serde(alias = "LSTM")]
    Lstm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ngrc, Method::Rc, Method::Lstm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ngrc => "ngrc",
            Method::Rc => "rc",
            Method::Lstm => "lstm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rows are laid out as `warmup | train | test`. Warm-up rows set the model
/// state but are never regressed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub warmup: usize,
    pub train: usize,
    pub test: usize,
}

impl Split {
    pub fn fit_rows(&self) -> usize {
        self.warmup + self.train
    }

    pub fn total(&self) -> usize {
        self.warmup + self.train + self.test
    }
}

/// Per-method hyperparameters; missing keys keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ngrc: Option<NgrcConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rc: Option<EsnConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lstm: Option<LstmConfig>,
}

impl MethodOverrides {
    pub fn is_empty(&self) -> bool {
        self.ngrc.is_none() && self.rc.is_none() && self.lstm.is_none()
    }
}

fn default_dt() -> f64 {
    0.01
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub system: SystemId,
    pub method: Method,
    pub total_points: usize,
    pub split: Split,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub noise_magnitude: f64,
    /// Seeds the process noise and the model's random initialization.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "MethodOverrides::is_empty")]
    pub method_overrides: MethodOverrides,
    /// Defaults to `out/<experiment_id>` for single runs and
    /// `<suite dir>/<experiment_id>` inside a suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.experiment_id)));
        if self.experiment_id.is_empty() {
            return Err(Error::Config("experiment_id must not be empty".into()));
        }
        if self.split.total() > self.total_points {
            return bad(format!(
                "split {}+{}+{} exceeds total_points {}",
                self.split.warmup, self.split.train, self.split.test, self.total_points
            ));
        }
        if self.split.train == 0 || self.split.test == 0 {
            return bad("train and test must be non-empty".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive".into());
        }
        if !(self.noise_magnitude >= 0.0 && self.noise_magnitude.is_finite()) {
            return bad("noise_magnitude must be non-negative".into());
        }
        let o = &self.method_overrides;
        let foreign = match self.method {
            Method::Ngrc => o.rc.is_some() || o.lstm.is_some(),
            Method::Rc => o.ngrc.is_some() || o.lstm.is_some(),
            Method::Lstm => o.ngrc.is_some() || o.rc.is_some(),
        };
        if foreign {
            return bad(format!("method_overrides only accepts the [{}] table for this method", self.method));
        }
        Ok(())
    }

    /// NG-RC hyperparameters as run.
    pub fn ngrc(&self) -> NgrcConfig {
        self.method_overrides.ngrc.clone().unwrap_or_default()
    }

    /// Reservoir hyperparameters as run; the seed comes from the experiment.
    pub fn rc(&self) -> EsnConfig {
        EsnConfig { seed: self.seed, ..self.method_overrides.rc.clone().unwrap_or_default() }
    }

    /// LSTM hyperparameters as run; the seed comes from the experiment.
    pub fn lstm(&self) -> LstmConfig {
        LstmConfig { seed: self.seed, ..self.method_overrides.lstm.clone().unwrap_or_default() }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment configs always serialize")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl Suite {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let suite: Suite = toml::from_str(text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })?;
        let mut seen = BTreeSet::new();
        for e in &suite.experiments {
            if !seen.insert(e.experiment_id.as_str()) {
                return Err(Error::Parse {
                    path: path.into(),
                    message: format!("duplicate experiment_id {:?}", e.experiment_id),
                });
            }
        }
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("suites always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
experiment_id = "t"
system = "lorenz"
method = "ngrc"
total_points = 100
split = { warmup = 2, train = 48, test = 50 }
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL, Path::new("x")).unwrap();
        assert_eq!((c.dt, c.noise_magnitude, c.seed), (0.01, 0.0, 42));
        assert_eq!(c.ngrc(), NgrcConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nlearning_rat = 0.1\n");
        assert!(matches!(ExperimentConfig::from_toml(&text, Path::new("x")), Err(Error::Parse { .. })));
        let text = format!("{MINIMAL}\n[method_overrides.ngrc]\nregularisation = 1.0\n");
        assert!(ExperimentConfig::from_toml(&text, Path::new("x")).is_err());
    }

    #[test]
    fn partial_overrides_keep_other_defaults() {
        let text = format!("{MINIMAL}\n[method_overrides.ngrc]\nk = 3\nregularization = 1e-4\n");
        let c = ExperimentConfig::from_toml(&text, Path::new("x")).unwrap();
        let n = c.ngrc();
        assert_eq!((n.delay_taps, n.regularization, n.order), (3, 1e-4, 2));
    }

    #[test]
    fn split_must_fit() {
        let mut c = ExperimentConfig::from_toml(MINIMAL, Path::new("x")).unwrap();
        c.total_points = 99;
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides_must_match_method() {
        let text = format!("{MINIMAL}\n[method_overrides.rc]\nn_units = 10\n");
        let c = ExperimentConfig::from_toml(&text, Path::new("x")).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_flows_into_model_configs() {
        let mut c = ExperimentConfig::from_toml(MINIMAL, Path::new("x")).unwrap();
        c.seed = 7;
        assert_eq!(c.rc().seed, 7);
        assert_eq!(c.lstm().seed, 7);
    }

    #[test]
    fn suite_round_trip_and_duplicates() {
        let c = ExperimentConfig::from_toml(MINIMAL, Path::new("x")).unwrap();
        let suite = Suite { output_dir: None, experiments: vec![c.clone()] };
        assert_eq!(Suite::from_toml(&suite.to_toml(), Path::new("s")).unwrap(), suite);
        let dup = Suite { output_dir: None, experiments: vec![c.clone(), c] };
        assert!(Suite::from_toml(&dup.to_toml(), Path::new("s")).is_err());
        assert!(Suite::from_toml("", Path::new("s")).unwrap().experiments.is_empty());
    }
}
