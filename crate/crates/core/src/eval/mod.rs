//! Evaluation: confusion-matrix metrics, baseline predictors, the status
//! change subset, and the feature-subset ablation harness.

mod ablation;
mod baseline;
mod metrics;

pub use ablation::{
    ablation_columns, matrix_dataset, run_ablation, write_ablation_report, write_importance_report, AblationConfig,
    AblationOutcome, AblationRow, FittedConfig, AblationSettings, ABLATION_HEADER, IMPORTANCE_HEADER,
};
pub use baseline::{change_subset, majority_predict, naive_predict, naive_predictions};
pub use metrics::{
    class_metrics, macro_f1, macro_report, ClassMetrics, ConfusionCounts, EvaluationReport, Subset,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{preds} predictions but {labels} labels")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("unknown ablation config {0:?}")]
    UnknownConfig(String),
    #[error("{0} is a fixed predictor with nothing to fit")]
    NotTrainable(&'static str),
    #[error("feature matrix lacks a lag-1 target column")]
    NoLagTarget,
    #[error(transparent)]
    Features(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Boost(#[from] crate::boost::BoostError),
    #[error(transparent)]
    Tune(#[from] crate::tune::TuneError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
