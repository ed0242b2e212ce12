use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;
use xshuffle_core::experiment::{ScheduleConfig, TestPlan, CANONICAL_PRACTICE_TRIALS};
use xshuffle_core::imagecore::load_cifar100_binary;
use xshuffle_core::{Dataset, Split};

/// Environment variable that overrides the listen address.
pub const LISTEN_ENV: &str = "XSHUFFLE_LISTEN";
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const DEFAULT_CONFIRMATION_TIMEOUT_MS: u64 = 3000;
/// Size of the stand-in dataset used when no CIFAR file is configured.
pub const SYNTHETIC_LEN: usize = 10_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("confirmation timeout must be positive")]
    Timeout,
    #[error("trial-count override must be positive")]
    TrialCount,
    #[error("data directory {path}: {source}")]
    DataDir { path: PathBuf, source: std::io::Error },
    #[error("dataset {path}: {message}")]
    Dataset { path: PathBuf, message: String },
}

/// How each new session's schedule seed is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedPolicy {
    /// Every session gets the same schedule.
    Fixed(u64),
    /// Fresh seed per session, recorded in the event log.
    PerSession,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: String,
    pub data_dir: PathBuf,
    /// CIFAR-100 test-split binary; a seeded synthetic set is used when absent.
    pub dataset: Option<PathBuf>,
    pub seed_policy: SeedPolicy,
    pub practice_trials: Option<usize>,
    /// Test trials for every condition instead of the canonical plan.
    pub trials_per_condition: Option<usize>,
    pub confirmation_timeout_ms: u64,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            listen: std::env::var(LISTEN_ENV).unwrap_or_else(|_| DEFAULT_LISTEN.to_string()),
            data_dir: data_dir.into(),
            dataset: None,
            seed_policy: SeedPolicy::PerSession,
            practice_trials: None,
            trials_per_condition: None,
            confirmation_timeout_ms: DEFAULT_CONFIRMATION_TIMEOUT_MS,
        }
    }

    /// Checks the invariants and creates the data directory if needed.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.confirmation_timeout_ms == 0 {
            return Err(ConfigError::Timeout);
        }
        if self.practice_trials == Some(0) || self.trials_per_condition == Some(0) {
            return Err(ConfigError::TrialCount);
        }
        let dir_err = |source| ConfigError::DataDir {
            path: self.data_dir.clone(),
            source,
        };
        fs::create_dir_all(&self.data_dir).map_err(dir_err)?;
        let probe = self.data_dir.join(".write-probe");
        fs::write(&probe, b"").map_err(dir_err)?;
        fs::remove_file(&probe).map_err(dir_err)?;
        Ok(())
    }

    pub fn confirmation_timeout(&self) -> Duration {
        Duration::from_millis(self.confirmation_timeout_ms)
    }

    pub fn schedule_config(&self) -> ScheduleConfig {
        let mut plan = TestPlan::canonical();
        if let Some(n) = self.trials_per_condition {
            for e in &mut plan.entries {
                e.trials = n;
            }
        }
        ScheduleConfig {
            n_practice: self.practice_trials.unwrap_or(CANONICAL_PRACTICE_TRIALS),
            n_test: plan.total(),
            plan,
        }
    }

    pub fn load_dataset(&self) -> Result<Dataset, ConfigError> {
        match &self.dataset {
            None => Ok(Dataset::synthetic(Split::Test, SYNTHETIC_LEN, 0)),
            Some(path) => {
                let err = |message: String| ConfigError::Dataset {
                    path: path.clone(),
                    message,
                };
                let bytes = fs::read(path).map_err(|e| err(e.to_string()))?;
                load_cifar100_binary(&bytes, Split::Test).map_err(|e| err(e.to_string()))
            }
        }
    }
}
