//! Gradient-boosted decision trees for binary classification.
//!
//! Trees are grown depth-wise with exact greedy split enumeration on the
//! second-order logistic-loss gain. Missing values are routed to a learned
//! default direction at every split, so no imputation is needed upstream.

mod ensemble;
mod split;
mod tree;

pub use ensemble::{
    gain_importance, train, train_with_options, FeatureImportance, TrainOptions, TreeEnsemble,
};
pub use split::{best_split, SplitCandidate, SplitParams};
pub use tree::{Direction, Node, Tree};

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoostError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("predicted probability {0} is outside (0, 1)")]
    Probability(f64),
    #[error("training set needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("{rows} rows but {labels} labels")]
    LabelMismatch { rows: usize, labels: usize },
    #[error("row has {found} features, model expects {expected}")]
    RowWidth { expected: usize, found: usize },
    #[error("feature vocabulary differs from the model's feature order")]
    Vocabulary,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub num_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Minimum hessian sum in each child of a split.
    pub min_child_weight: f64,
    pub reg_lambda: f64,
    /// Minimum loss reduction for a split.
    pub gamma: f64,
    pub subsample_rows: f64,
    pub colsample: f64,
    pub base_score: f64,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            num_rounds: 100,
            learning_rate: 0.1,
            max_depth: 4,
            min_child_weight: 1.0,
            reg_lambda: 1.0,
            gamma: 0.0,
            subsample_rows: 1.0,
            colsample: 1.0,
            base_score: 0.5,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<(), BoostError> {
        let fail = |msg: &str| Err(BoostError::Config(msg.to_string()));
        if self.num_rounds < 1 {
            return fail("num_rounds must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return fail("learning_rate must be in (0, 1]");
        }
        if self.max_depth < 1 {
            return fail("max_depth must be at least 1");
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return fail("min_child_weight must be >= 0");
        }
        if !(self.reg_lambda >= 0.0 && self.reg_lambda.is_finite()) {
            return fail("reg_lambda must be >= 0");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return fail("gamma must be >= 0");
        }
        if !(self.subsample_rows > 0.0 && self.subsample_rows <= 1.0) {
            return fail("subsample_rows must be in (0, 1]");
        }
        if !(self.colsample > 0.0 && self.colsample <= 1.0) {
            return fail("colsample must be in (0, 1]");
        }
        if !(self.base_score > 0.0 && self.base_score < 1.0) {
            return fail("base_score must be in (0, 1)");
        }
        Ok(())
    }

    /// Loads a config from a JSON document. Unknown fields are ignored, so a
    /// tuned-config file with extra keys loads as well.
    pub fn load(path: &Path) -> Result<Self, BoostError> {
        let cfg: BoostConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn sigmoid(margin: f64) -> f64 {
    1.0 / (1.0 + (-margin).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Gradient and hessian of the logistic loss with respect to the margin.
pub fn logistic_grad_hess(p: f64, label: bool) -> Result<(f64, f64), BoostError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BoostError::Probability(p));
    }
    let y = if label { 1.0 } else { 0.0 };
    Ok((p - y, p * (1.0 - p)))
}

/// Logistic loss of a margin, computed without overflow.
pub fn logistic_loss(margin: f64, label: bool) -> f64 {
    // log(1 + e^m) - y m
    let softplus = if margin > 0.0 {
        margin + (-margin).exp().ln_1p()
    } else {
        margin.exp().ln_1p()
    };
    softplus - if label { margin } else { 0.0 }
}

/// Column-major feature table; `NaN` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Dataset {
    pub fn from_rows(names: Vec<String>, rows: &[Vec<Option<f64>>]) -> Result<Self, BoostError> {
        let width = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for row in rows {
            if row.len() != width {
                return Err(BoostError::RowWidth {
                    expected: width,
                    found: row.len(),
                });
            }
            for (col, v) in columns.iter_mut().zip(row) {
                col.push(v.unwrap_or(f64::NAN));
            }
        }
        Ok(Dataset {
            names,
            columns,
            n_rows: rows.len(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature]
    }

    pub fn value(&self, row: usize, feature: usize) -> Option<f64> {
        let v = self.columns[feature][row];
        (!v.is_nan()).then_some(v)
    }

    pub fn row(&self, row: usize) -> Vec<Option<f64>> {
        (0..self.n_features()).map(|f| self.value(row, f)).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.columns.iter().any(|c| c.iter().any(|v| v.is_nan()))
    }

    /// Copies the given rows (repeats allowed) into a new dataset.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            n_rows: rows.len(),
        }
    }
}
