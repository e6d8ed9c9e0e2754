use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use excursion_forecast::harness::ExperimentSpec;
use excursion_forecast::Error;

/// Problem with the experiment configuration. Reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(p) = &self.path {
            write!(f, " in {}", p.display())?;
        }
        if let Some(k) = &self.key {
            write!(f, " at `{k}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn new(path: &Path, key: Option<String>, message: impl Into<String>) -> Self {
        Self {
            path: Some(path.to_path_buf()),
            key,
            message: message.into(),
        }
    }
}

/// Library errors that stem from the configuration rather than the run.
pub fn from_library(e: &Error) -> Option<ConfigError> {
    match e {
        Error::InvalidConfig { key, reason } => Some(ConfigError {
            path: None,
            key: Some(key.clone()),
            message: reason.clone(),
        }),
        _ => None,
    }
}

pub fn parse_spec(text: &str, path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let key = (key != ".").then_some(key);
        ConfigError::new(path, key, e.inner().to_string())
    })?;
    spec.validate().map_err(|e| match from_library(&e) {
        Some(mut c) => {
            c.path = Some(path.to_path_buf());
            c
        }
        None => ConfigError::new(path, None, e.to_string()),
    })?;
    Ok(spec)
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::new(path, None, format!("cannot read config file: {e}")))?;
    parse_spec(&text, path)
}
