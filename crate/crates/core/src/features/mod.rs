//! Occupation-year design matrix: 12 labour-demand features from job ads,
//! 20 labour-supply features from quarterly statistics, lagged copies of
//! all 32, lagged targets and the shortage label.

mod demand;
mod matrix;
mod supply;

pub use demand::{demand_features, demand_features_for, DemandFeatures};
pub use matrix::{
    build_design_matrix, read_design_matrix, temporal_split, write_design_matrix, DesignMatrix,
    FeatureRow, MatrixOptions, TargetAlignment, MATRIX_FILE, ORDER_FILE,
};
pub use supply::{supply_features, SupplyTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{JobAd, LaborSupplyRecord, OccupationCode, ShortageLabel, SkillTaxonomy, SupplyMetric};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("no shortage labels to define the occupation-year grid")]
    NoLabels,
    #[error("lag count must be at least 1")]
    ZeroLags,
    #[error("split at {train_end} leaves the {side} side empty")]
    EmptySplit {
        train_end: i32,
        side: &'static str,
    },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub const DEMAND_FEATURES: [&str; 12] = [
    "posting_frequency",
    "max_median_salary",
    "min_median_salary",
    "max_average_salary",
    "min_average_salary",
    "max_average_experience",
    "min_average_experience",
    "max_average_education",
    "min_average_education",
    "specialized_count",
    "baseline_count",
    "software_count",
];

pub const BASE_FEATURE_COUNT: usize = DEMAND_FEATURES.len() + SupplyMetric::ALL.len();

/// Demand features for every labelled occupation (pooling ads coded at or
/// beneath it), supply features, and the design matrix built from both.
pub fn design_matrix_from_corpus(
    ads: &[JobAd],
    taxonomy: &SkillTaxonomy,
    supply: &[LaborSupplyRecord],
    labels: &[ShortageLabel],
    options: MatrixOptions,
) -> Result<DesignMatrix, FeatureError> {
    let tracked: Vec<OccupationCode> = labels
        .iter()
        .map(|l| l.occupation.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let demand = demand_features_for(ads, taxonomy, &tracked);
    build_design_matrix(&demand, &supply_features(supply), labels, options)
}

/// The 32 base feature names: demand first, then supply.
pub fn base_feature_names() -> Vec<&'static str> {
    DEMAND_FEATURES
        .iter()
        .copied()
        .chain(SupplyMetric::ALL.iter().map(|m| m.name()))
        .collect()
}

/// Which data source a column is derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSource {
    #[serde(rename = "LD")]
    Demand,
    #[serde(rename = "LS")]
    Supply,
    #[serde(rename = "target")]
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub source: FeatureSource,
    /// 0 for base features.
    pub lag: u32,
}

impl FeatureColumn {
    /// Class label used in `feature_order.json`.
    pub fn class(&self) -> &'static str {
        match (self.source, self.lag) {
            (FeatureSource::Target, _) => "lagged-target",
            (_, l) if l > 0 => "AR-lag",
            (FeatureSource::Demand, _) => "LD",
            (FeatureSource::Supply, _) => "LS",
        }
    }

    /// Name of the unlagged feature this column copies.
    pub fn base_name(&self) -> &str {
        match self.name.rsplit_once("_lag") {
            Some((base, _)) if self.lag > 0 => base,
            _ => &self.name,
        }
    }
}

/// Canonical column order shared by every row of a matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureOrder {
    pub lags: u32,
    pub columns: Vec<FeatureColumn>,
}

impl FeatureOrder {
    /// Base features, then each lag's copies, then lagged targets.
    pub fn new(lags: u32) -> Self {
        let base: Vec<(&str, FeatureSource)> = DEMAND_FEATURES
            .iter()
            .map(|n| (*n, FeatureSource::Demand))
            .chain(
                SupplyMetric::ALL
                    .iter()
                    .map(|m| (m.name(), FeatureSource::Supply)),
            )
            .collect();
        let mut columns: Vec<FeatureColumn> = base
            .iter()
            .map(|(n, s)| FeatureColumn {
                name: n.to_string(),
                source: *s,
                lag: 0,
            })
            .collect();
        for lag in 1..=lags {
            columns.extend(base.iter().map(|(n, s)| FeatureColumn {
                name: format!("{n}_lag{lag}"),
                source: *s,
                lag,
            }));
        }
        columns.extend((1..=lags).map(|lag| FeatureColumn {
            name: format!("target_lag{lag}"),
            source: FeatureSource::Target,
            lag,
        }));
        FeatureOrder { lags, columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Column indices whose source is in `sources`, in canonical order.
    pub fn indices_for(&self, sources: &[FeatureSource]) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| sources.contains(&c.source))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn target_lag_index(&self, lag: u32) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.source == FeatureSource::Target && c.lag == lag)
    }
}
