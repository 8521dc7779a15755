use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gaborface::face_locate::DetectConfig;
use gaborface::features::FeatureSpec;
use gaborface::fiducial::FiducialConfig;
use gaborface::pipeline::{AugmentConfig, PipelineConfig};
use gaborface::recognizer::{SplitRatio, TrainConfig};
use gaborface::skin::FisConfig;
use gaborface::toyset::ToysetConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSection {
    pub ratios: Vec<SplitRatio>,
    pub combinations: usize,
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            ratios: SplitRatio::ALL.to_vec(),
            combinations: 5,
            seed: 0,
        }
    }
}

/// Everything a command can be configured with. Every section is optional
/// in the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Fuzzy skin model file; the built-in model when absent. Relative paths
    /// resolve against the config file's directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fis: Option<PathBuf>,
    pub detect: DetectConfig,
    pub fiducial: FiducialConfig,
    pub features: FeatureSpec,
    pub train: TrainConfig,
    pub split: SplitSection,
    pub augment: AugmentConfig,
    pub toyset: ToysetConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(fis) = &cfg.fis {
            if fis.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.fis = Some(base.join(fis));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(fis) = &self.fis {
            if !fis.is_file() {
                bail!("fis file {} does not exist", fis.display());
            }
        }
        self.fiducial.validate()?;
        self.features.validate()?;
        self.train.validate()?;
        self.toyset.validate()?;
        if self.split.combinations == 0 || self.split.ratios.is_empty() {
            bail!("split needs at least one ratio and one combination");
        }
        if self.detect.mean_filter.is_multiple_of(2) {
            bail!("detect.mean_filter must be odd, got {}", self.detect.mean_filter);
        }
        Ok(())
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let fis = match &self.fis {
            Some(p) => FisConfig::load(p)?,
            None => FisConfig::default(),
        };
        let cfg = PipelineConfig {
            fis,
            detect: self.detect,
            fiducial: self.fiducial,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let run = RunConfig::load(&dir.join("default.toml")).unwrap();
        run.validate().unwrap();
        assert_eq!(run.pipeline().unwrap().fis, FisConfig::default());
        let expected = RunConfig {
            fis: run.fis.clone(),
            ..RunConfig::default()
        };
        assert_eq!(run, expected);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::default();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }
}
