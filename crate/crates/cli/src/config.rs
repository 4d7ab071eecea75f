//! Run configuration: a TOML file of flat dotted keys plus command-line overrides.

use std::path::{Path, PathBuf};

use boxtorus_core::model::{Nonlinearity, NonlinearityParams};
use boxtorus_core::solver::{ContinuationSchedule, MultiStartOptions};
use boxtorus_core::verify::{Estimate, EstimateParams};
use boxtorus_core::Error as CoreError;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    VerifyEstimates,
    Selftest,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::VerifyEstimates => "verify-estimates",
            Mode::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NonlinearityKeys {
    pub s: f64,
    pub alpha: f64,
    pub a_coeffs: Vec<f64>,
    pub b_coeffs: Vec<f64>,
}

impl Default for NonlinearityKeys {
    fn default() -> Self {
        Self {
            s: 3.0,
            alpha: 0.5,
            a_coeffs: vec![1.0],
            b_coeffs: vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiStartKeys {
    pub l_max: u32,
    pub starts_per_level: usize,
    pub rho: f64,
}

impl Default for MultiStartKeys {
    fn default() -> Self {
        let d = MultiStartOptions::default();
        Self {
            l_max: d.l_max,
            starts_per_level: d.starts_per_level,
            rho: d.rho,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyKeys {
    pub samples: usize,
    /// Ensemble decay; each estimate uses its own preset when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    pub estimates: Vec<String>,
    /// Truncation radius of the reported tables.
    pub m: usize,
    pub s: f64,
    pub p: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl Default for VerifyKeys {
    fn default() -> Self {
        let p = EstimateParams::default();
        Self {
            samples: 200,
            decay: None,
            estimates: Estimate::ALL.iter().map(|e| e.name().to_owned()).collect(),
            m: 32,
            s: p.s,
            p: p.p,
            gamma: p.gamma,
            gamma_prime: p.gamma_prime,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub nonlinearity: NonlinearityKeys,
    pub schedule: ContinuationSchedule,
    pub multistart: MultiStartKeys,
    pub verify: VerifyKeys,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Solve,
            seed: 0,
            out_dir: PathBuf::from("boxtorus-out"),
            nonlinearity: NonlinearityKeys::default(),
            schedule: ContinuationSchedule::default(),
            multistart: MultiStartKeys::default(),
            verify: VerifyKeys::default(),
        }
    }
}

/// Every key a config file may set.
pub const KEYS: &[&str] = &[
    "mode",
    "seed",
    "out_dir",
    "nonlinearity.s",
    "nonlinearity.alpha",
    "nonlinearity.a_coeffs",
    "nonlinearity.b_coeffs",
    "schedule.beta0",
    "schedule.beta_min",
    "schedule.factor",
    "schedule.m",
    "schedule.tol_residual",
    "schedule.max_newton",
    "multistart.l_max",
    "multistart.starts_per_level",
    "multistart.rho",
    "verify.samples",
    "verify.decay",
    "verify.estimates",
    "verify.m",
    "verify.s",
    "verify.p",
    "verify.gamma",
    "verify.gamma_prime",
];

/// A rejected configuration, naming the offending key.
#[derive(Debug, thiserror::Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<String>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            _ => out.push(key),
        }
    }
}

/// Dotted key of the assignment whose line contains byte `offset`.
fn key_at(text: &str, offset: usize) -> Option<String> {
    let mut section = String::new();
    let mut start = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_owned();
        }
        if offset < start + line.len() {
            let key = trimmed.split('=').next()?.trim().replace(['"', ' '], "");
            return Some(if section.is_empty() { key } else { format!("{section}.{key}") });
        }
        start += line.len();
    }
    None
}

impl RunConfig {
    /// Parses and validates config text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("<file>", e.message()))?;
        let mut keys = Vec::new();
        flatten("", &table, &mut keys);
        if let Some(bad) = keys.iter().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::new(bad.as_str(), "unknown key"));
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e: toml::de::Error| {
            let key = e.span().and_then(|span| key_at(text, span.start)).unwrap_or_else(|| "<file>".into());
            ConfigError::new(key, e.message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks every numeric range before any computation starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let scoped = |section: &str, e: CoreError| match e {
            CoreError::Domain { quantity, reason } => {
                let name = quantity.rsplit('/').next().unwrap_or(quantity);
                ConfigError::new(format!("{section}.{name}"), reason)
            }
            other => ConfigError::new(section, other.to_string()),
        };
        self.nonlinearity().map_err(|e| scoped("nonlinearity", e))?;
        self.schedule.validate().map_err(|e| scoped("schedule", e))?;
        if self.multistart.l_max < 1 {
            return Err(ConfigError::new("multistart.l_max", "must be at least 1"));
        }
        if self.multistart.starts_per_level < 1 {
            return Err(ConfigError::new("multistart.starts_per_level", "must be at least 1"));
        }
        if !(self.multistart.rho > 0.0 && self.multistart.rho.is_finite()) {
            return Err(ConfigError::new("multistart.rho", "must be positive"));
        }
        let v = &self.verify;
        if v.samples < 1 {
            return Err(ConfigError::new("verify.samples", "must be at least 1"));
        }
        if let Some(d) = v.decay {
            if !(d > 0.0 && d.is_finite()) {
                return Err(ConfigError::new("verify.decay", format!("must be positive, got {d}")));
            }
        }
        if let Some(bad) = v.estimates.iter().find(|e| Estimate::parse(e).is_none()) {
            let names: Vec<&str> = Estimate::ALL.iter().map(|e| e.name()).collect();
            return Err(ConfigError::new(
                "verify.estimates",
                format!("unknown estimate `{bad}`, expected one of {}", names.join(", ")),
            ));
        }
        if v.m < 4 {
            return Err(ConfigError::new("verify.m", format!("must be at least 4, got {}", v.m)));
        }
        if !(v.s > 0.0 && v.s < 1.0) {
            return Err(ConfigError::new("verify.s", format!("need 0 < s < 1, got {}", v.s)));
        }
        if !(v.p > 2.0 && v.p.is_finite()) {
            return Err(ConfigError::new("verify.p", format!("need p > 2, got {}", v.p)));
        }
        if !(v.gamma > 0.0 && v.gamma < 1.0) {
            return Err(ConfigError::new("verify.gamma", format!("need 0 < gamma < 1, got {}", v.gamma)));
        }
        if !(v.gamma_prime > 0.0 && v.gamma_prime < v.gamma) {
            return Err(ConfigError::new(
                "verify.gamma_prime",
                format!("need 0 < gamma_prime < gamma, got {}", v.gamma_prime),
            ));
        }
        Ok(())
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity<f64>, CoreError> {
        let n = &self.nonlinearity;
        Nonlinearity::new(NonlinearityParams {
            s: n.s,
            alpha: n.alpha,
            a_coeffs: n.a_coeffs.clone(),
            b_coeffs: n.b_coeffs.clone(),
        })
    }

    pub fn multistart_options(&self) -> MultiStartOptions {
        MultiStartOptions {
            l_max: self.multistart.l_max,
            starts_per_level: self.multistart.starts_per_level,
            rho: self.multistart.rho,
            rng_seed: self.seed,
        }
    }

    pub fn estimate_params(&self) -> EstimateParams {
        EstimateParams {
            s: self.verify.s,
            p: self.verify.p,
            gamma: self.verify.gamma,
            gamma_prime: self.verify.gamma_prime,
        }
    }

    pub fn estimates(&self) -> Vec<Estimate> {
        self.verify.estimates.iter().filter_map(|e| Estimate::parse(e)).collect()
    }

    /// Canonical TOML rendering, echoed into the manifest.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn dotted_keys_and_tables_agree() {
        let a = RunConfig::parse("schedule.m = 8\nnonlinearity.alpha = 1.0\n").unwrap();
        let b = RunConfig::parse("[schedule]\nm = 8\n[nonlinearity]\nalpha = 1.0\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.schedule.m, 8);
        assert_eq!(a.schedule.beta0, 1.0);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| RunConfig::parse(text).unwrap_err().key;
        assert_eq!(key("schedule.mm = 3"), "schedule.mm");
        assert_eq!(key("colour = 3"), "colour");
        assert_eq!(key("schedule.factor = 1.5"), "schedule.factor");
        assert_eq!(key("schedule.beta_min = 2.0"), "schedule.beta_min");
        assert_eq!(key("nonlinearity.s = 0.5"), "nonlinearity.s");
        assert_eq!(key("nonlinearity.a_coeffs = [1.0, 0.9]"), "nonlinearity.a_coeffs");
        assert_eq!(key("verify.estimates = [\"nope\"]"), "verify.estimates");
        assert_eq!(key("verify.gamma_prime = 0.9"), "verify.gamma_prime");
        assert_eq!(key("schedule.m = \"big\""), "schedule.m");
        assert_eq!(key("mode = \"dance\""), "mode");
    }

    #[test]
    fn every_listed_key_is_accepted() {
        let text = r#"
mode = "verify-estimates"
seed = 9
out_dir = "x"
nonlinearity.s = 3.0
nonlinearity.alpha = 0.5
nonlinearity.a_coeffs = [1.0]
nonlinearity.b_coeffs = [0.0, 0.1]
schedule.beta0 = 1.0
schedule.beta_min = 0.01
schedule.factor = 0.5
schedule.m = 8
schedule.tol_residual = 1e-10
schedule.max_newton = 40
multistart.l_max = 2
multistart.starts_per_level = 3
multistart.rho = 1.0
verify.samples = 10
verify.decay = 1.5
verify.estimates = ["sobolev"]
verify.m = 16
verify.s = 0.5
verify.p = 3.0
verify.gamma = 0.5
verify.gamma_prime = 0.3
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.mode, Mode::VerifyEstimates);
        assert_eq!(cfg.verify.decay, Some(1.5));
        assert_eq!(text.lines().filter(|l| l.contains('=')).count(), KEYS.len());
    }
}
