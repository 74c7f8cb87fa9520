//! JSON run configuration shared by the CLI and the HTTP gateway.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, RewardCoefficients};
use crate::corpus::PreprocessConfig;
use crate::error::{Error, Result};
use crate::metrics::LogBase;
use crate::session::{SessionConfig, SplitPlan};
use crate::topics::{ApplyAspectOptions, LdaParams};

/// Environment variable naming a config file when none is given explicitly.
pub const CONFIG_ENV: &str = "LANDSCAPE_CONFIG";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    pub preprocess: PreprocessConfig,
    pub lda: LdaParams,
    pub agent: AgentConfig,
    pub reward_coeffs: RewardCoefficients,
    pub apply_aspect: ApplyAspectOptions,
    pub log_base: LogBase,
    pub split: Option<SplitPlan>,
}

impl LandscapeConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })
    }

    /// Load `explicit`, else the file named by `LANDSCAPE_CONFIG`, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<(Self, Option<PathBuf>)> {
        let path = explicit.map(Path::to_path_buf).or_else(|| {
            std::env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        });
        match path {
            Some(p) => Ok((Self::load(&p)?, Some(p))),
            None => Ok((Self::default(), None)),
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.lda.seed = s;
        }
        self
    }

    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            agent: self.agent,
            reward_coeffs: self.reward_coeffs,
            apply_aspect: self.apply_aspect,
            log_base: self.log_base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections_fill_defaults() {
        let c: LandscapeConfig =
            serde_json::from_str(r#"{"lda": {"k": 39}, "agent": {"alpha": 0.2}}"#).unwrap();
        assert_eq!(c.lda.k, 39);
        assert_eq!(c.lda.beta, 0.01);
        assert_eq!(c.agent.alpha, 0.2);
        assert_eq!(c.agent.gamma, 0.9);
        assert_eq!(c.reward_coeffs.lambda1, 0.75);
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(serde_json::from_str::<LandscapeConfig>(r#"{"lad": {}}"#).is_err());
    }

    #[test]
    fn seed_override() {
        assert_eq!(LandscapeConfig::default().with_seed(Some(9)).lda.seed, 9);
        assert_eq!(LandscapeConfig::default().with_seed(None).lda.seed, 42);
    }
}
