//! KNN classifier, classification metrics and the train/test experiment
//! harness.

mod experiment;
mod knn;
mod metrics;

pub use experiment::{
    evaluate_augmented, run_experiment, stratified_split, write_results_to, ExperimentConfig, ExperimentRow,
    DEFAULT_GRID, RESULT_HEADER,
};
pub use knn::{knn_predict, Standardizer, DEFAULT_K};
pub use metrics::{average_precision, compute_metrics, pr_curve, roc_auc, roc_curve, ConfusionMatrix, MetricsReport};
