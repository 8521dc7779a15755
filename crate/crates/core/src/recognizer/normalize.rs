use crate::error::{Error, Result};

/// Per-dimension min-max scaling fitted on training vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot fit normalization on an empty set".into()))?
            .as_ref();
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for v in vectors {
            let v = v.as_ref();
            if v.len() != min.len() {
                return Err(Error::InvalidInput(format!(
                    "vector length {} differs from {}",
                    v.len(),
                    min.len()
                )));
            }
            for (i, &x) in v.iter().enumerate() {
                min[i] = min[i].min(x);
                max[i] = max[i].max(x);
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(x - min) / (max - min)`; constant dimensions map to 0. Values
    /// outside the fitted range are not clipped.
    pub fn transform(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_constants() {
        let n = Normalizer::fit(&[vec![0.0, 5.0], vec![10.0, 5.0]]).unwrap();
        assert_eq!(n.transform(&[0.0, 5.0]), vec![0.0, 0.0]);
        assert_eq!(n.transform(&[10.0, 7.0]), vec![1.0, 0.0]);
        assert_eq!(n.transform(&[5.0, 5.0]), vec![0.5, 0.0]);
        let single = Normalizer::fit(&[vec![3.0, -1.0]]).unwrap();
        assert_eq!(single.transform(&[3.0, -1.0]), vec![0.0, 0.0]);
        assert!(Normalizer::fit::<Vec<f64>>(&[]).is_err());
        assert!(Normalizer::fit(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
