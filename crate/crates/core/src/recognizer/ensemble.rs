use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::{Loss, MlpNet};
use super::normalize::Normalizer;
use crate::error::{Error, Result};
use crate::features::FeatureSpec;
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Stop a network once its mean epoch loss falls below this value;
    /// 0 disables early stopping.
    pub early_stop: f64,
    pub loss: Loss,
    /// Initial weights are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 16,
            learning_rate: 0.05,
            epochs: 300,
            seed: 0,
            early_stop: 0.0,
            loss: Loss::Mse,
            init_scale: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.epochs == 0 || self.hidden_dim == 0 {
            return Err(Error::Config(
                "training needs learning_rate > 0, epochs >= 1 and hidden_dim >= 1".into(),
            ));
        }
        if !(self.early_stop >= 0.0) || !(self.init_scale > 0.0) {
            return Err(Error::Config("early_stop must be >= 0 and init_scale > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub label: String,
    pub values: Vec<f64>,
}

impl LabeledVector {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }
}

/// One network per enrolled person plus the input scaling they share.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub(crate) features: FeatureSpec,
    pub(crate) labels: Vec<String>,
    pub(crate) normalizer: Normalizer,
    pub(crate) nets: Vec<MlpNet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub index: usize,
    pub label: String,
    pub scores: Vec<f64>,
}

/// Mean training loss of each person's network after every epoch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub losses: Vec<Vec<f64>>,
}

impl TrainingLog {
    /// `person,epoch,loss` rows.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("person,epoch,loss\n");
        for (label, losses) in labels.iter().zip(&self.losses) {
            for (e, l) in losses.iter().enumerate() {
                out.push_str(&format!("{label},{},{l}\n", e + 1));
            }
        }
        out
    }
}

/// Index of the maximal score; ties go to the lowest index.
///
/// # Panics
/// Panics on an empty slice.
pub fn argmax(scores: &[f64]) -> usize {
    assert!(!scores.is_empty(), "argmax of no scores");
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

impl Ensemble {
    pub fn from_parts(
        features: FeatureSpec,
        labels: Vec<String>,
        normalizer: Normalizer,
        nets: Vec<MlpNet>,
    ) -> Result<Self> {
        if labels.len() != nets.len() || labels.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} networks; need one network per label and at least two",
                labels.len(),
                nets.len()
            )));
        }
        let n = normalizer.dim();
        if nets.iter().any(|net| net.input_dim() != n) {
            return Err(Error::InvalidInput(
                "networks and normalization disagree on input size".into(),
            ));
        }
        Ok(Self {
            features,
            labels,
            normalizer,
            nets,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn features(&self) -> &FeatureSpec {
        &self.features
    }

    pub fn input_dim(&self) -> usize {
        self.normalizer.dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.nets[0].hidden_dim()
    }

    pub fn nets(&self) -> &[MlpNet] {
        &self.nets
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Output of every person's network.
    pub fn scores(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "feature vector has {} values, model expects {}",
                v.len(),
                self.input_dim()
            )));
        }
        let x = self.normalizer.transform(v);
        Ok(self.nets.iter().map(|n| n.forward(&x)).collect())
    }

    pub fn predict(&self, v: &[f64]) -> Result<Prediction> {
        let scores = self.scores(v)?;
        let index = argmax(&scores);
        Ok(Prediction {
            index,
            label: self.labels[index].clone(),
            scores,
        })
    }

    /// Fraction of samples predicted as their own label.
    pub fn evaluate(&self, test: &[LabeledVector]) -> Result<f64> {
        if test.is_empty() {
            return Err(Error::InvalidInput("empty test set".into()));
        }
        let mut correct = 0usize;
        for s in test {
            if self.predict(&s.values)?.label == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / test.len() as f64)
    }
}

pub fn train(samples: &[LabeledVector], features: FeatureSpec, cfg: &TrainConfig) -> Result<Ensemble> {
    train_with_log(samples, features, cfg).map(|(e, _)| e)
}

/// Trains one network per distinct label (sorted), each against targets
/// 1 for its own samples and 0 for the rest. Networks train in parallel;
/// each draws its initialization and epoch shuffles from its own seeded
/// stream, so the result does not depend on scheduling.
pub fn train_with_log(
    samples: &[LabeledVector],
    features: FeatureSpec,
    cfg: &TrainConfig,
) -> Result<(Ensemble, TrainingLog)> {
    cfg.validate()?;
    let mut labels: Vec<String> = samples.iter().map(|s| s.label.clone()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::DegenerateTask(format!(
            "need >= 2 persons, found {}",
            labels.len()
        )));
    }
    let vectors: Vec<&[f64]> = samples.iter().map(|s| s.values.as_slice()).collect();
    let normalizer = Normalizer::fit(&vectors)?;
    if normalizer.dim() == 0 {
        return Err(Error::InvalidInput("feature vectors are empty".into()));
    }
    let inputs: Vec<Vec<f64>> = vectors.iter().map(|v| normalizer.transform(v)).collect();
    let class_of: Vec<usize> = samples
        .iter()
        .map(|s| labels.binary_search(&s.label).expect("label collected above"))
        .collect();

    let trained: Vec<(MlpNet, Vec<f64>)> = (0..labels.len())
        .into_par_iter()
        .map(|person| train_one(&inputs, &class_of, person, cfg))
        .collect::<Result<_>>()?;
    let (nets, losses) = trained.into_iter().unzip();
    Ok((
        Ensemble {
            features,
            labels,
            normalizer,
            nets,
        },
        TrainingLog { losses },
    ))
}

fn train_one(inputs: &[Vec<f64>], class_of: &[usize], person: usize, cfg: &TrainConfig) -> Result<(MlpNet, Vec<f64>)> {
    let mut rng = seeded_rng(cfg.seed, person as u64);
    let mut net = MlpNet::random(inputs[0].len(), cfg.hidden_dim, cfg.init_scale, &mut rng)?;
    let mut scratch = net.scratch();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let target = if class_of[i] == person { 1.0 } else { 0.0 };
            total += net.sgd_step(&inputs[i], target, cfg.learning_rate, cfg.loss, &mut scratch);
        }
        let mean = total / inputs.len() as f64;
        losses.push(mean);
        if mean < cfg.early_stop {
            break;
        }
    }
    Ok((net, losses))
}
