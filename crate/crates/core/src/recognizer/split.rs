use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Train/test proportions of the evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitRatio {
    #[serde(rename = "60-40")]
    Train60,
    #[serde(rename = "50-50")]
    Train50,
    #[serde(rename = "30-70")]
    Train30,
}

impl SplitRatio {
    pub const ALL: [SplitRatio; 3] = [SplitRatio::Train60, SplitRatio::Train50, SplitRatio::Train30];

    pub fn train_fraction(self) -> f64 {
        match self {
            SplitRatio::Train60 => 0.6,
            SplitRatio::Train50 => 0.5,
            SplitRatio::Train30 => 0.3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SplitRatio::Train60 => "60-40",
            SplitRatio::Train50 => "50-50",
            SplitRatio::Train30 => "30-70",
        }
    }
}

impl fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SplitRatio::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown split `{s}` (expected 60-40, 50-50 or 30-70)")))
    }
}

/// Split ratio, number of random combinations and the base seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratio: SplitRatio,
    pub combinations: usize,
    pub seed: u64,
}

/// Indices of the training and test samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-label shuffle; the first `round(fraction x n)` samples of each label
/// train, the rest test. Both index lists come back sorted.
pub fn stratified_split<L: Eq>(labels: &[L], fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {fraction} outside [0, 1]"
        )));
    }
    let mut groups: Vec<(&L, Vec<usize>)> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == l) {
            Some((_, v)) => v.push(i),
            None => groups.push((l, vec![i])),
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (k, (_, mut idx)) in groups.into_iter().enumerate() {
        idx.shuffle(&mut seeded_rng(seed, k as u64));
        let n_train = (fraction * idx.len() as f64).round() as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
