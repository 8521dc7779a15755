//! Image-to-features chain and its batch form over a dataset.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::face_locate::{detect_face, DetectConfig, Detection};
use crate::features::{geometric_vector, jets, FaceFeatures, FeatureSpec, FeatureTable, GaborBank};
use crate::fiducial::{landmarks, FiducialConfig, LandmarkSet};
use crate::imaging::{io, jitter, rgb_to_ycbcr, ImageRgb, ImageYCbCr, Jitter, YCbCrChannel};
use crate::recognizer::Augmenter;
use crate::rng::seeded_rng;
use crate::skin::FisConfig;

/// Everything known about one face after detection and landmarking.
#[derive(Debug, Clone)]
pub struct FaceAnalysis {
    pub detection: Detection,
    pub chip: ImageYCbCr,
    pub landmarks: LandmarkSet,
}

pub fn analyze(
    img: &ImageRgb,
    fis: &FisConfig,
    detect: &DetectConfig,
    fiducial: &FiducialConfig,
) -> Result<FaceAnalysis> {
    let detection = detect_face(img, fis, detect)?;
    let chip = rgb_to_ycbcr(&detection.chip);
    let landmarks = landmarks(&chip, fiducial)?;
    Ok(FaceAnalysis {
        detection,
        chip,
        landmarks,
    })
}

/// Geometric vector plus jets of the chip's luminance.
pub fn face_features(analysis: &FaceAnalysis, bank: &GaborBank) -> Result<FaceFeatures> {
    Ok(FaceFeatures {
        geometric: geometric_vector(&analysis.landmarks),
        jets: jets(&analysis.chip.channel(YCbCrChannel::Y), &analysis.landmarks, bank)?,
    })
}

/// Stage settings shared by every command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub fis: FisConfig,
    pub detect: DetectConfig,
    pub fiducial: FiducialConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.fis.validate()?;
        self.fiducial.validate()
    }

    pub fn features_of(&self, img: &ImageRgb, bank: &GaborBank) -> Result<FaceFeatures> {
        let a = analyze(img, &self.fis, &self.detect, &self.fiducial)?;
        face_features(&a, bank)
    }
}

/// An input image that produced no feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub label: String,
    pub path: PathBuf,
    pub reason: String,
}

/// Result of extracting a whole dataset.
#[derive(Debug, Clone)]
pub struct ExtractedDataset {
    pub table: FeatureTable,
    /// Source image of each table row.
    pub paths: Vec<PathBuf>,
    pub skipped: Vec<Skipped>,
}

impl ExtractedDataset {
    /// `path<TAB>reason` lines.
    pub fn skip_report(&self) -> String {
        self.skipped
            .iter()
            .map(|s| format!("{}\t{}\n", s.path.display(), s.reason))
            .collect()
    }
}

/// Extracts every image in parallel; results keep dataset order. Images
/// that fail to load, detect or landmark go to the skip list.
pub fn extract_dataset(dataset: &Dataset, cfg: &PipelineConfig, features: &FeatureSpec) -> Result<ExtractedDataset> {
    let bank = features.bank()?;
    let results: Vec<Result<FaceFeatures>> = dataset
        .entries
        .par_iter()
        .map(|e| io::read_rgb(&e.path).and_then(|img| cfg.features_of(&img, &bank)))
        .collect();
    let mut out = ExtractedDataset {
        table: FeatureTable::new(bank, features.wavelength_scale),
        paths: Vec::new(),
        skipped: Vec::new(),
    };
    for (entry, r) in dataset.entries.iter().zip(results) {
        match r {
            Ok(f) => {
                out.table.push(entry.label.clone(), f);
                out.paths.push(entry.path.clone());
            }
            Err(e) => {
                log::warn!("skipping {}: {e}", entry.path.display());
                out.skipped.push(Skipped {
                    label: entry.label.clone(),
                    path: entry.path.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Photometric and geometric perturbations for training-set augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub enabled: bool,
    /// Perturbed copies per training image.
    pub copies: usize,
    pub max_angle_deg: f64,
    pub max_shift: f64,
    /// Brightness gain is drawn from `1 +- max_gain`.
    pub max_gain: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            copies: 2,
            max_angle_deg: 10.0,
            max_shift: 2.0,
            max_gain: 0.2,
        }
    }
}

impl AugmentConfig {
    pub fn draw(&self, rng: &mut impl Rng) -> Jitter {
        let mut sym = |m: f64| if m > 0.0 { rng.random_range(-m..=m) } else { 0.0 };
        Jitter {
            angle_deg: sym(self.max_angle_deg),
            dx: sym(self.max_shift),
            dy: sym(self.max_shift),
            gain: 1.0 + sym(self.max_gain),
        }
    }
}

/// Augmenter that re-reads training image `i` of `extracted`, perturbs it
/// and runs the full chain again. Copies that fail detection are dropped.
pub fn image_augmenter<'a>(
    extracted: &'a ExtractedDataset,
    cfg: &'a PipelineConfig,
    augment: AugmentConfig,
) -> Box<Augmenter<'a>> {
    Box::new(move |i: usize, seed: u64| {
        let Ok(img) = io::read_rgb(&extracted.paths[i]) else {
            return Vec::new();
        };
        let mut rng = seeded_rng(seed, 0);
        (0..augment.copies)
            .filter_map(|_| {
                let j = augment.draw(&mut rng);
                cfg.features_of(&jitter(&img, &j), extracted.table.bank()).ok()
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureKind, ORIENTATIONS};
    use crate::toyset::{sample_scene, write_toyset, ToysetConfig};

    #[test]
    fn sample_scene_yields_features() {
        let cfg = PipelineConfig::default();
        let spec = FeatureSpec::default();
        let f = cfg.features_of(&sample_scene(), &spec.bank().unwrap()).unwrap();
        assert_eq!(f.jets.len(), 250);
        assert!(f.geometric.as_slice().iter().all(|&d| d > 0.0));
        assert!(ORIENTATIONS >= spec.orientations);
    }

    #[test]
    fn dataset_extraction_accounts_for_every_image() {
        let dir = tempfile::tempdir().unwrap();
        let toy = ToysetConfig {
            persons: 2,
            samples: 3,
            ..ToysetConfig::default()
        };
        write_toyset(&toy, dir.path()).unwrap();
        std::fs::write(dir.path().join("person_01").join("broken.png"), b"not an image").unwrap();
        let ds = Dataset::scan(dir.path()).unwrap();
        let spec = FeatureSpec {
            kind: FeatureKind::Geometric,
            ..FeatureSpec::default()
        };
        let ex = extract_dataset(&ds, &PipelineConfig::default(), &spec).unwrap();
        assert_eq!(ex.table.len() + ex.skipped.len(), 7);
        assert!(ex.skipped.iter().any(|s| s.path.ends_with("broken.png")));
        assert!(ex.skip_report().contains("broken.png\t"));
    }
}
