use std::path::{Path, PathBuf};

use biasview_core::config::PipelineConfig;
use biasview_core::studylab::{Condition, GateConfig, Questionnaire};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionMode {
    Fixed,
    #[default]
    Alternating,
    RandomSeeded,
}

fn default_page_size() -> usize {
    10
}

fn default_seed() -> u64 {
    2020
}

/// Study deployment settings. Relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Corpus directory or review file.
    pub corpus: PathBuf,
    /// Pipeline TOML; defaults apply when absent.
    #[serde(default)]
    pub pipeline: Option<PathBuf>,
    pub telemetry_dir: PathBuf,
    #[serde(default)]
    pub condition_mode: ConditionMode,
    /// Used by `FIXED`.
    #[serde(default)]
    pub fixed_condition: Option<Condition>,
    /// Drives session ids, random conditions and hotel order.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub questionnaire: Option<PathBuf>,
    #[serde(default)]
    pub gate: GateConfig,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

impl StudyConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let mut cfg: StudyConfig =
            toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        cfg.resolve(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.telemetry_dir);
        if let Some(p) = self.pipeline.as_mut() {
            fix(p);
        }
        if let Some(p) = self.questionnaire.as_mut() {
            fix(p);
        }
    }

    /// Checks referenced inputs exist and the mode is complete.
    pub fn validate(&self) -> anyhow::Result<()> {
        for path in [Some(&self.corpus), self.pipeline.as_ref(), self.questionnaire.as_ref()]
            .into_iter()
            .flatten()
        {
            if !path.exists() {
                anyhow::bail!("{} does not exist", path.display());
            }
        }
        if self.condition_mode == ConditionMode::Fixed && self.fixed_condition.is_none() {
            anyhow::bail!("condition_mode FIXED needs fixed_condition");
        }
        if self.page_size == 0 {
            anyhow::bail!("page_size must be positive");
        }
        Ok(())
    }

    pub fn pipeline_config(&self) -> anyhow::Result<PipelineConfig> {
        Ok(match &self.pipeline {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        })
    }

    pub fn questionnaire(&self) -> anyhow::Result<Questionnaire> {
        Ok(match &self.questionnaire {
            Some(path) => Questionnaire::load(path)?,
            None => Questionnaire::bundled(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let mut cfg: StudyConfig = toml::from_str("corpus = \"c\"\ntelemetry_dir = \"t\"\n").unwrap();
        cfg.resolve(Path::new("/srv"));
        assert_eq!(cfg.condition_mode, ConditionMode::Alternating);
        assert_eq!(cfg.corpus, PathBuf::from("/srv/c"));
        assert_eq!(cfg.gate.min_ops, 102);
        assert_eq!(cfg.page_size, 10);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fixed_mode_needs_a_condition() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = StudyConfig {
            corpus: dir.path().to_path_buf(),
            pipeline: None,
            telemetry_dir: dir.path().join("t"),
            condition_mode: ConditionMode::Fixed,
            fixed_condition: None,
            seed: 1,
            questionnaire: None,
            gate: GateConfig::default(),
            page_size: 10,
        };
        assert!(cfg.validate().is_err());
        let ok = StudyConfig { fixed_condition: Some(Condition::Baseline), ..cfg };
        ok.validate().unwrap();
    }
}
