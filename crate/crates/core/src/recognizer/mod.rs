//! One-vs-rest identification: one small MLP per enrolled person, trained
//! to output 1 on that person's faces and 0 elsewhere; the identity is the
//! network with the highest output.

mod ensemble;
mod experiment;
mod mlp;
mod model_io;
mod normalize;
mod split;

pub use ensemble::{argmax, train, train_with_log, Ensemble, LabeledVector, Prediction, TrainConfig, TrainingLog};
pub use experiment::{
    run_experiment, run_experiment_with, Augmenter, ExperimentPlan, ExperimentRow, ResultRow, ResultsTable,
};
pub use mlp::{gradient_check, sigmoid, Gradients, Loss, MlpNet, Scratch};
pub use model_io::{load_model, model_from_str, model_to_string, save_model, MAGIC, VERSION};
pub use normalize::Normalizer;
pub use split::{stratified_split, Split, SplitRatio, SplitSpec};
