use std::path::{Path, PathBuf};

use qgen_core::quizengine::{EstimatorConfig, ItemBank, QuizSpec};
use qgen_core::sim::BankSource;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the session store root.
pub const DATA_DIR_ENV: &str = "QG_DATA_DIR";

/// Service settings, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    pub master_seed: u64,
    /// Activities before the post-test is served.
    #[serde(default = "default_activities")]
    pub activities: u32,
    #[serde(default)]
    pub bank: BankSource,
    /// Directory of article bundles whose text accompanies activity quizzes.
    #[serde(default)]
    pub articles: Option<PathBuf>,
    #[serde(default)]
    pub quiz: QuizSpec,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    /// Store root used when neither the flag nor the environment sets one.
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
}

fn default_host() -> String {
    "127.0.0.1".into()
}
fn default_port() -> u16 {
    8080
}
fn default_activities() -> u32 {
    12
}

impl ServiceConfig {
    pub fn parse_toml(text: &str) -> Result<ServiceConfig, CliError> {
        let cfg: ServiceConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("service config: {e}")))?;
        cfg.quiz
            .validate()
            .map_err(|e| CliError::Validation(format!("service config: quiz: {e}")))?;
        if cfg.activities == 0 {
            return Err(CliError::Validation("service config: activities must be positive".into()));
        }
        Ok(cfg)
    }

    /// Reads a config file and makes its relative paths absolute against it.
    pub fn load(path: &Path) -> Result<ServiceConfig, CliError> {
        let text = read_text(path)?;
        let mut cfg = ServiceConfig::parse_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.bank = resolve_bank(cfg.bank, base);
        cfg.articles = cfg.articles.map(|p| base.join(p));
        cfg.data_dir = cfg.data_dir.map(|p| base.join(p));
        Ok(cfg)
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn resolve_bank(bank: BankSource, base: &Path) -> BankSource {
    match bank {
        BankSource::File { path } => BankSource::File { path: base.join(path) },
        other => other,
    }
}

pub fn load_bank(source: &BankSource) -> Result<ItemBank, CliError> {
    match source {
        BankSource::Synthetic(s) => Ok(s.build()),
        BankSource::File { path } => ItemBank::load(path).map_err(CliError::from),
    }
}

/// Store root: explicit flag, then `QG_DATA_DIR`, then the config file, then `./qg-data`.
pub fn data_dir(flag: Option<PathBuf>, cfg: &ServiceConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.data_dir.clone())
        .unwrap_or_else(|| PathBuf::from("qg-data"))
}
