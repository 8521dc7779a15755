//! Feature vectors for a located face: geometric distances, Gabor jets, and
//! their concatenation.

mod gabor;
mod geometric;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use gabor::{
    build_bank, build_bank_with, default_orientation_subset, gabor_kernel, jet_at, jets, orientation_angle,
    select_jets, GaborBank, GaborChannel, GaborParams, Jet, JetMode, Kernel, ORIENTATIONS, ORIENTATION_COUNTS,
    WAVELENGTHS,
};
pub use geometric::{geometric_vector, GeometricVector, GEOMETRIC_NAMES};
pub use table::{FaceFeatures, FeatureTable};

use crate::error::{Error, Result};
use crate::fiducial::Role;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    #[serde(rename = "geom")]
    Geometric,
    #[serde(rename = "gabor")]
    Gabor,
    #[serde(rename = "fused")]
    Fused,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::Geometric, FeatureKind::Gabor, FeatureKind::Fused];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Geometric => "geom",
            FeatureKind::Gabor => "gabor",
            FeatureKind::Fused => "fused",
        }
    }

    pub fn uses_jets(self) -> bool {
        self != FeatureKind::Geometric
    }

    /// Vector length for a bank with `jet_len` coefficients per landmark.
    pub fn dimension(self, jet_len: usize) -> usize {
        match self {
            FeatureKind::Geometric => 7,
            FeatureKind::Gabor => 10 * jet_len,
            FeatureKind::Fused => 7 + 10 * jet_len,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geom" | "geometric" => Ok(FeatureKind::Geometric),
            "gabor" => Ok(FeatureKind::Gabor),
            "fused" => Ok(FeatureKind::Fused),
            _ => Err(Error::InvalidParameter(format!(
                "unknown feature kind `{s}` (expected geom, gabor or fused)"
            ))),
        }
    }
}

/// Which vector to build and from which bank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSpec {
    pub kind: FeatureKind,
    /// Orientation count, one of [`ORIENTATION_COUNTS`]. Ignored by the
    /// geometric kind.
    pub orientations: usize,
    pub jet_mode: JetMode,
    pub wavelength_scale: f64,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            kind: FeatureKind::Fused,
            orientations: 5,
            jet_mode: JetMode::Magnitude,
            wavelength_scale: 1.0,
        }
    }
}

impl FeatureSpec {
    pub fn bank(&self) -> Result<GaborBank> {
        Ok(
            build_bank_with(default_orientation_subset(self.orientations)?, self.wavelength_scale)?
                .with_mode(self.jet_mode),
        )
    }

    /// Channel count `C` of the bank, or `None` for the geometric kind.
    pub fn channels(&self) -> Option<usize> {
        self.kind.uses_jets().then_some(self.orientations * WAVELENGTHS.len())
    }

    pub fn validate(&self) -> Result<()> {
        default_orientation_subset(self.orientations)?;
        if !(self.wavelength_scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wavelength scale must be positive, got {}",
                self.wavelength_scale
            )));
        }
        Ok(())
    }
}

/// `[geometric; jets]`.
pub fn fuse(geometric: &GeometricVector, jets: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(7 + jets.len());
    v.extend_from_slice(geometric.as_slice());
    v.extend_from_slice(jets);
    v
}

/// Assembles the vector of the given kind.
pub fn feature_vector(kind: FeatureKind, geometric: &GeometricVector, jets: &[f64]) -> Vec<f64> {
    match kind {
        FeatureKind::Geometric => geometric.as_slice().to_vec(),
        FeatureKind::Gabor => jets.to_vec(),
        FeatureKind::Fused => fuse(geometric, jets),
    }
}

/// Column names of the jets part: `P{n}_o{k}_l{j}` (plus `_re`/`_im` in
/// quadrature mode).
pub fn jet_names(bank: &GaborBank) -> Vec<String> {
    let mut names = Vec::with_capacity(10 * bank.jet_len());
    for role in Role::ALL {
        for ch in bank.channels() {
            let base = format!("{role}_o{}_l{}", ch.orientation, ch.wavelength);
            match bank.mode() {
                JetMode::Magnitude => names.push(base),
                JetMode::Quadrature => {
                    names.push(format!("{base}_re"));
                    names.push(format!("{base}_im"));
                }
            }
        }
    }
    names
}

pub fn feature_names(kind: FeatureKind, bank: &GaborBank) -> Vec<String> {
    let geom = GEOMETRIC_NAMES.iter().map(|s| s.to_string());
    match kind {
        FeatureKind::Geometric => geom.collect(),
        FeatureKind::Gabor => jet_names(bank),
        FeatureKind::Fused => geom.chain(jet_names(bank)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_names_agree() {
        for n in ORIENTATION_COUNTS {
            let bank = build_bank(n).unwrap();
            for kind in FeatureKind::ALL {
                assert_eq!(feature_names(kind, &bank).len(), kind.dimension(bank.jet_len()));
            }
        }
        let bank = build_bank(1).unwrap();
        assert_eq!(jet_names(&bank)[0], "P1_o0_l0");
        assert_eq!(jet_names(&bank)[49], "P10_o0_l4");
    }

    #[test]
    fn fused_is_geometric_then_jets() {
        let g = GeometricVector([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let v = fuse(&g, &[8.0, 9.0]);
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn kind_parsing() {
        for k in FeatureKind::ALL {
            assert_eq!(k.as_str().parse::<FeatureKind>().unwrap(), k);
        }
        assert!("edges".parse::<FeatureKind>().is_err());
    }
}
