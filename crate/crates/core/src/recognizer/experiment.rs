//! Split-and-sweep evaluation: recognition rate per (feature row, split
//! ratio), averaged over seeded random stratified splits.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::ensemble::{train, LabeledVector, TrainConfig};
use super::split::{stratified_split, Split, SplitRatio};
use crate::error::{Error, Result};
use crate::features::{FaceFeatures, FeatureKind, FeatureSpec, FeatureTable};
use crate::rng::mix_seed;

/// One table row: a feature kind and, for jet kinds, an orientation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub spec: FeatureSpec,
}

impl ExperimentRow {
    pub fn new(kind: FeatureKind, orientations: usize) -> Self {
        Self {
            spec: FeatureSpec {
                kind,
                orientations,
                ..FeatureSpec::default()
            },
        }
    }

    /// Geometric, then Gabor and fused at 5..25 channels: 11 rows.
    pub fn full_sweep() -> Vec<Self> {
        let mut rows = vec![Self::new(FeatureKind::Geometric, 1)];
        for kind in [FeatureKind::Gabor, FeatureKind::Fused] {
            rows.extend((1..=5).map(|n| Self::new(kind, n)));
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub rows: Vec<ExperimentRow>,
    pub ratios: Vec<SplitRatio>,
    pub combinations: usize,
    pub seed: u64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            rows: ExperimentRow::full_sweep(),
            ratios: SplitRatio::ALL.to_vec(),
            combinations: 5,
            seed: 0,
        }
    }
}

/// Extra training faces derived from training face `index`, drawn with
/// `seed`. Only ever applied to training samples.
pub type Augmenter<'a> = dyn Fn(usize, u64) -> Vec<FaceFeatures> + Sync + 'a;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub row: ExperimentRow,
    /// Mean recognition rate per ratio, `None` if any combination failed.
    pub cells: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub ratios: Vec<SplitRatio>,
    pub rows: Vec<ResultRow>,
    /// One message per failed (row, ratio, combination).
    pub failures: Vec<String>,
}

impl ResultsTable {
    pub fn cell(&self, kind: FeatureKind, channels: Option<usize>, ratio: SplitRatio) -> Option<f64> {
        let col = self.ratios.iter().position(|&r| r == ratio)?;
        self.rows
            .iter()
            .find(|r| r.row.spec.kind == kind && r.row.spec.channels() == channels)
            .and_then(|r| r.cells[col])
    }

    /// `features,channels,<ratios...>` with rates in percent; failed cells
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("features,channels");
        for r in &self.ratios {
            write!(out, ",{r}").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            let channels = row.row.spec.channels().map(|c| c.to_string()).unwrap_or_default();
            write!(out, "{},{channels}", row.row.spec.kind).unwrap();
            for cell in &row.cells {
                match cell {
                    Some(rate) => write!(out, ",{:.4}", 100.0 * rate).unwrap(),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_experiment(table: &FeatureTable, plan: &ExperimentPlan, cfg: &TrainConfig) -> Result<ResultsTable> {
    run_experiment_with(table, plan, cfg, None)
}

/// Runs every (row, ratio, combination) cell. All rows of one
/// (ratio, combination) share the same split and training seed, so rows
/// are compared on identical data.
pub fn run_experiment_with(
    table: &FeatureTable,
    plan: &ExperimentPlan,
    cfg: &TrainConfig,
    augment: Option<&Augmenter<'_>>,
) -> Result<ResultsTable> {
    cfg.validate()?;
    let mut distinct = table.labels.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateTask(format!(
            "need >= 2 persons, found {}",
            distinct.len()
        )));
    }
    if plan.combinations == 0 || plan.ratios.is_empty() || plan.rows.is_empty() {
        return Err(Error::InvalidParameter("experiment plan is empty".into()));
    }

    // Splits and augmented faces, one set per (ratio, combination).
    let folds: Vec<(usize, usize)> = (0..plan.ratios.len())
        .flat_map(|r| (0..plan.combinations).map(move |c| (r, c)))
        .collect();
    let prepared: Vec<(Split, Vec<(String, FaceFeatures)>)> = folds
        .par_iter()
        .map(|&(r, c)| {
            let split = stratified_split(
                &table.labels,
                plan.ratios[r].train_fraction(),
                mix_seed(plan.seed, c as u64),
            )?;
            let extra = match augment {
                Some(f) => split
                    .train
                    .iter()
                    .flat_map(|&i| {
                        let seed = mix_seed(mix_seed(plan.seed, 2_000 + c as u64), i as u64);
                        f(i, seed).into_iter().map(move |ff| (table.labels[i].clone(), ff))
                    })
                    .collect(),
                None => Vec::new(),
            };
            Ok((split, extra))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize, usize)> = (0..plan.rows.len())
        .flat_map(|row| folds.iter().enumerate().map(move |(f, &(r, _))| (row, f, r)))
        .collect();
    let outcomes: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(row, f, _)| {
            let (split, extra) = &prepared[f];
            let comb = folds[f].1;
            let cell_cfg = TrainConfig {
                seed: mix_seed(plan.seed, 1_000 + comb as u64),
                ..*cfg
            };
            run_cell(table, &plan.rows[row].spec, split, extra, &cell_cfg)
        })
        .collect();

    let mut sums = vec![vec![Some(0.0); plan.ratios.len()]; plan.rows.len()];
    let mut failures = Vec::new();
    for (&(row, f, r), outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok(rate) => {
                if let Some(s) = sums[row][r].as_mut() {
                    *s += rate;
                }
            }
            Err(e) => {
                let spec = plan.rows[row].spec;
                let channels = spec.channels().map(|c| c.to_string()).unwrap_or_else(|| "-".into());
                failures.push(format!(
                    "{} {} {} combination {}: {e}",
                    spec.kind, channels, plan.ratios[r], folds[f].1
                ));
                sums[row][r] = None;
            }
        }
    }
    let rows = plan
        .rows
        .iter()
        .zip(sums)
        .map(|(row, s)| ResultRow {
            row: *row,
            cells: s.into_iter().map(|v| v.map(|t| t / plan.combinations as f64)).collect(),
        })
        .collect();
    Ok(ResultsTable {
        ratios: plan.ratios.clone(),
        rows,
        failures,
    })
}

fn run_cell(
    table: &FeatureTable,
    spec: &FeatureSpec,
    split: &Split,
    extra: &[(String, FaceFeatures)],
    cfg: &TrainConfig,
) -> Result<f64> {
    let extract = table.extractor(spec)?;
    let labeled = |i: usize| -> Result<LabeledVector> {
        Ok(LabeledVector::new(table.labels[i].clone(), extract(&table.rows[i])?))
    };
    let mut train_set = split.train.iter().map(|&i| labeled(i)).collect::<Result<Vec<_>>>()?;
    for (label, ff) in extra {
        train_set.push(LabeledVector::new(label.clone(), extract(ff)?));
    }
    let test_set = split.test.iter().map(|&i| labeled(i)).collect::<Result<Vec<_>>>()?;
    let ensemble = train(&train_set, *spec, cfg)?;
    ensemble.evaluate(&test_set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_bank, GeometricVector};

    fn toy_table() -> FeatureTable {
        // Three persons whose geometric vectors sit in separate clusters and
        // whose jets are pure noise.
        let mut t = FeatureTable::new(build_bank(5).unwrap(), 1.0);
        for p in 0..3 {
            for s in 0..6 {
                let g = GeometricVector(std::array::from_fn(|i| 10.0 * p as f64 + (i + s) as f64 * 0.1));
                let jets = (0..250).map(|k| ((k * 31 + s * 7 + p) % 13) as f64).collect();
                t.push(format!("p{p}"), FaceFeatures { geometric: g, jets });
            }
        }
        t
    }

    fn quick() -> TrainConfig {
        TrainConfig {
            hidden_dim: 4,
            epochs: 200,
            learning_rate: 0.5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn table_shape_and_determinism() {
        let plan = ExperimentPlan {
            rows: vec![
                ExperimentRow::new(FeatureKind::Geometric, 1),
                ExperimentRow::new(FeatureKind::Gabor, 1),
            ],
            combinations: 2,
            ..ExperimentPlan::default()
        };
        let a = run_experiment(&toy_table(), &plan, &quick()).unwrap();
        assert_eq!(a.rows.len(), 2);
        assert!(a.rows.iter().all(|r| r.cells.len() == 3));
        assert!(a.failures.is_empty());
        assert_eq!(a.cell(FeatureKind::Geometric, None, SplitRatio::Train60), Some(1.0));
        let csv = a.to_csv();
        assert!(csv.starts_with("features,channels,60-40,50-50,30-70\ngeom,,100.0000,"));
        assert!(csv.contains("\ngabor,5,"));
        assert_eq!(run_experiment(&toy_table(), &plan, &quick()).unwrap().to_csv(), csv);
    }

    #[test]
    fn failed_cells_are_recorded() {
        let plan = ExperimentPlan {
            rows: vec![ExperimentRow::new(FeatureKind::Gabor, 8)],
            combinations: 1,
            ..ExperimentPlan::default()
        };
        let r = run_experiment(&toy_table(), &plan, &quick()).unwrap();
        assert_eq!(r.rows[0].cells, vec![None, None, None]);
        assert_eq!(r.failures.len(), 3);
        assert!(r.to_csv().ends_with("gabor,40,,,\n"));
    }

    #[test]
    fn augmentation_only_adds_training_faces() {
        let table = toy_table();
        let plan = ExperimentPlan {
            rows: vec![ExperimentRow::new(FeatureKind::Geometric, 1)],
            ratios: vec![SplitRatio::Train50],
            combinations: 1,
            seed: 3,
        };
        let calls = std::sync::Mutex::new(Vec::new());
        let aug = |i: usize, _seed: u64| {
            calls.lock().unwrap().push(i);
            vec![table.rows[i].clone()]
        };
        run_experiment_with(&table, &plan, &quick(), Some(&aug)).unwrap();
        let split = stratified_split(&table.labels, 0.5, mix_seed(3, 0)).unwrap();
        let mut seen = calls.into_inner().unwrap();
        seen.sort_unstable();
        assert_eq!(seen, split.train);
    }
}
