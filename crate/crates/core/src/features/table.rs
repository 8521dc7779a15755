use super::gabor::{select_jets, GaborBank};
use super::{feature_vector, FeatureSpec, GeometricVector};
use crate::error::{Error, Result};

/// Geometric vector and jets of one face. The jets come from whatever bank
/// the owning table was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFeatures {
    pub geometric: GeometricVector,
    pub jets: Vec<f64>,
}

/// Labeled faces with jets from one bank, from which the vectors of any
/// sub-bank and feature kind can be cut without touching the images again.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    bank: GaborBank,
    wavelength_scale: f64,
    pub labels: Vec<String>,
    pub rows: Vec<FaceFeatures>,
}

impl FeatureTable {
    pub fn new(bank: GaborBank, wavelength_scale: f64) -> Self {
        Self {
            bank,
            wavelength_scale,
            labels: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn bank(&self) -> &GaborBank {
        &self.bank
    }

    pub fn push(&mut self, label: impl Into<String>, features: FaceFeatures) {
        self.labels.push(label.into());
        self.rows.push(features);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Returns a closure building the `spec` vector of any face whose jets
    /// were computed with this table's bank.
    pub fn extractor(&self, spec: &FeatureSpec) -> Result<impl Fn(&FaceFeatures) -> Result<Vec<f64>> + Sync + '_> {
        let subset = if spec.kind.uses_jets() {
            if spec.wavelength_scale != self.wavelength_scale {
                return Err(Error::InvalidParameter(format!(
                    "table jets use wavelength scale {}, requested {}",
                    self.wavelength_scale, spec.wavelength_scale
                )));
            }
            Some(spec.bank()?)
        } else {
            None
        };
        let kind = spec.kind;
        Ok(move |f: &FaceFeatures| {
            let jets = match &subset {
                Some(sub) => select_jets(&f.jets, &self.bank, sub)?,
                None => Vec::new(),
            };
            Ok(feature_vector(kind, &f.geometric, &jets))
        })
    }

    /// Vectors of every row for `spec`.
    pub fn vectors(&self, spec: &FeatureSpec) -> Result<Vec<Vec<f64>>> {
        let extract = self.extractor(spec)?;
        self.rows.iter().map(extract).collect()
    }
}
