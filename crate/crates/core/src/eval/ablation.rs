use std::path::Path;

use log::info;
use serde::Serialize;

use super::baseline::{change_subset, naive_predictions};
use super::metrics::{macro_report, EvaluationReport, Subset};
use super::EvalError;
use crate::boost::{self, Dataset, FeatureImportance, TreeEnsemble};
use crate::features::{temporal_split, DesignMatrix, FeatureOrder, FeatureSource};
use crate::seed;
use crate::tune::{self, SearchOutcome, SearchSettings, SearchSpace};

/// A feature subset to train and evaluate. `Naive` copies last year's
/// status and trains nothing.
#[allow(non_camel_case_types, clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AblationConfig {
    AllIn,
    LD,
    LS,
    LD_plus_LS,
    AutoRegressive,
    Naive,
}

impl AblationConfig {
    pub const ALL: [AblationConfig; 6] = [
        AblationConfig::AllIn,
        AblationConfig::LD,
        AblationConfig::LS,
        AblationConfig::LD_plus_LS,
        AblationConfig::AutoRegressive,
        AblationConfig::Naive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationConfig::AllIn => "AllIn",
            AblationConfig::LD => "LD",
            AblationConfig::LS => "LS",
            AblationConfig::LD_plus_LS => "LD_plus_LS",
            AblationConfig::AutoRegressive => "AutoRegressive",
            AblationConfig::Naive => "Naive",
        }
    }

    /// Case-insensitive; `-` and `+` are accepted in place of `_plus_`-style names.
    pub fn from_name(s: &str) -> Result<Self, EvalError> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase()
            .replace("plus", "");
        let found = match key.as_str() {
            "allin" => AblationConfig::AllIn,
            "ld" => AblationConfig::LD,
            "ls" => AblationConfig::LS,
            "ldls" => AblationConfig::LD_plus_LS,
            "autoregressive" | "ar" => AblationConfig::AutoRegressive,
            "naive" => AblationConfig::Naive,
            _ => return Err(EvalError::UnknownConfig(s.to_string())),
        };
        Ok(found)
    }

    /// Parses a comma-separated list; `all` expands to every config.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, EvalError> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::ALL.to_vec());
        }
        s.split(',').map(|p| Self::from_name(p.trim())).collect()
    }

    /// Feature sources the model sees; `None` for the naive baseline.
    pub fn sources(self) -> Option<&'static [FeatureSource]> {
        use FeatureSource::*;
        match self {
            AblationConfig::AllIn => Some(&[Demand, Supply, Target]),
            AblationConfig::LD => Some(&[Demand]),
            AblationConfig::LS => Some(&[Supply]),
            AblationConfig::LD_plus_LS => Some(&[Demand, Supply]),
            AblationConfig::AutoRegressive => Some(&[Target]),
            AblationConfig::Naive => None,
        }
    }
}

/// Column indices a config trains on, base and lagged alike.
pub fn ablation_columns(order: &FeatureOrder, config: AblationConfig) -> Vec<usize> {
    config.sources().map_or_else(Vec::new, |s| order.indices_for(s))
}

/// The given matrix columns as a boosting dataset.
pub fn matrix_dataset(matrix: &DesignMatrix, columns: &[usize]) -> Dataset {
    let names = columns.iter().map(|&c| matrix.order.columns[c].name.clone()).collect();
    let rows: Vec<Vec<Option<f64>>> = matrix
        .rows
        .iter()
        .map(|r| columns.iter().map(|&c| r.values[c]).collect())
        .collect();
    Dataset::from_rows(names, &rows).expect("rows share the matrix width")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationSettings {
    pub train_end: i32,
    /// Search settings shared by every config, seed included.
    pub search: SearchSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub config: AblationConfig,
    pub subset: Subset,
    pub report: EvaluationReport,
}

/// A fitted model-based config.
#[derive(Debug, Clone)]
pub struct FittedConfig {
    pub config: AblationConfig,
    pub search: SearchOutcome,
    pub model: TreeEnsemble,
}

#[derive(Debug, Clone)]
pub struct AblationOutcome {
    /// Two rows per config, full test first, in config order.
    pub rows: Vec<AblationRow>,
    pub fitted: Vec<FittedConfig>,
}

impl AblationOutcome {
    pub fn report(&self, config: AblationConfig, subset: Subset) -> Option<&EvaluationReport> {
        self.rows
            .iter()
            .find(|r| r.config == config && r.subset == subset)
            .map(|r| &r.report)
    }

    pub fn model(&self, config: AblationConfig) -> Option<&TreeEnsemble> {
        self.fitted.iter().find(|f| f.config == config).map(|f| &f.model)
    }
}

fn score(preds: &[bool], labels: &[bool]) -> Result<EvaluationReport, EvalError> {
    if preds.is_empty() {
        return Ok(EvaluationReport::empty());
    }
    macro_report(preds, labels)
}

fn evaluate_naive(test: &DesignMatrix) -> Result<EvaluationReport, EvalError> {
    let (kept, preds) = naive_predictions(test);
    let labels: Vec<bool> = kept.iter().map(|&i| test.rows[i].label.is_shortage()).collect();
    score(&preds, &labels)
}

fn evaluate_model(model: &TreeEnsemble, test: &DesignMatrix, columns: &[usize]) -> Result<EvaluationReport, EvalError> {
    if test.is_empty() {
        return Ok(EvaluationReport::empty());
    }
    let probs = model.predict_dataset(&matrix_dataset(test, columns))?;
    let preds: Vec<bool> = probs.iter().map(|&p| p >= 0.5).collect();
    score(&preds, &test.labels())
}

/// Splits the matrix at `train_end`, tunes and refits every model-based
/// config on the training years, and scores each config on the full test
/// years and on the test rows whose status changed.
pub fn run_ablation(
    matrix: &DesignMatrix,
    configs: &[AblationConfig],
    settings: &AblationSettings,
) -> Result<AblationOutcome, EvalError> {
    let (train, test) = temporal_split(matrix, settings.train_end)?;
    let changed = change_subset(&test);
    let train_labels = train.labels();
    let space = SearchSpace::for_labels(&train_labels)?;
    let mut rows = Vec::with_capacity(configs.len() * 2);
    let mut fitted = Vec::new();
    for &config in configs {
        let (full, change) = if config == AblationConfig::Naive {
            (evaluate_naive(&test)?, evaluate_naive(&changed)?)
        } else {
            let columns = ablation_columns(&matrix.order, config);
            let data = matrix_dataset(&train, &columns);
            let search = tune::randomized_search(&data, &train_labels, &space, &settings.search)?;
            info!(
                "{}: best draw {} with cv macro-F1 {:.4}",
                config.name(),
                search.best_index,
                search.best_result().mean_macro_f1
            );
            let rows_idx = tune::oversample(
                &train_labels,
                search.best.oversample_multiplier,
                seed::derive(settings.search.seed, "ablation/refit"),
            )?;
            let refit_labels: Vec<bool> = rows_idx.iter().map(|&i| train_labels[i]).collect();
            let model = boost::train(&data.select_rows(&rows_idx), &refit_labels, &search.best.boost)?;
            let reports = (
                evaluate_model(&model, &test, &columns)?,
                evaluate_model(&model, &changed, &columns)?,
            );
            fitted.push(FittedConfig { config, search, model });
            reports
        };
        rows.push(AblationRow {
            config,
            subset: Subset::FullTest,
            report: full,
        });
        rows.push(AblationRow {
            config,
            subset: Subset::ChangeSubset,
            report: change,
        });
    }
    Ok(AblationOutcome { rows, fitted })
}

pub const ABLATION_HEADER: [&str; 12] = [
    "config",
    "subset",
    "macro_precision",
    "macro_recall",
    "macro_f1",
    "class1_p",
    "class1_r",
    "class1_f1",
    "class0_p",
    "class0_r",
    "class0_f1",
    "n_rows",
];

pub fn write_ablation_report(path: &Path, rows: &[AblationRow]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ABLATION_HEADER)?;
    for row in rows {
        let r = &row.report;
        let mut rec = vec![row.config.name().to_string(), row.subset.as_str().to_string()];
        rec.extend(
            [
                r.macro_precision,
                r.macro_recall,
                r.macro_f1,
                r.class1.precision,
                r.class1.recall,
                r.class1.f1,
                r.class0.precision,
                r.class0.recall,
                r.class0.f1,
            ]
            .iter()
            .map(f64::to_string),
        );
        rec.push(r.n_rows.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub const IMPORTANCE_HEADER: [&str; 4] = ["rank", "feature", "gain", "share"];

pub fn write_importance_report(path: &Path, importance: &[FeatureImportance]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(IMPORTANCE_HEADER)?;
    for (i, f) in importance.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            f.feature.clone(),
            f.gain.to_string(),
            f.share.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{OccupationCode, ShortageStatus};
    use crate::features::FeatureRow;
    use std::collections::BTreeSet;

    #[test]
    fn config_columns() {
        let order = FeatureOrder::new(2);
        let set = |c| ablation_columns(&order, c).into_iter().collect::<BTreeSet<_>>();
        let union: BTreeSet<usize> = [AblationConfig::LD, AblationConfig::LS, AblationConfig::AutoRegressive]
            .into_iter()
            .flat_map(set)
            .collect();
        assert_eq!(set(AblationConfig::AllIn), union);
        assert_eq!(set(AblationConfig::AllIn).len(), order.len());
        assert_eq!(
            set(AblationConfig::AutoRegressive),
            [96, 97].into_iter().collect::<BTreeSet<_>>()
        );
        assert!(set(AblationConfig::Naive).is_empty());
        let ldls: BTreeSet<usize> = set(AblationConfig::LD).union(&set(AblationConfig::LS)).copied().collect();
        assert_eq!(set(AblationConfig::LD_plus_LS), ldls);
    }

    #[test]
    fn config_names() {
        for c in AblationConfig::ALL {
            assert_eq!(AblationConfig::from_name(c.name()).unwrap(), c);
        }
        assert_eq!(AblationConfig::from_name("ld+ls").unwrap(), AblationConfig::LD_plus_LS);
        assert_eq!(AblationConfig::parse_list("all").unwrap().len(), 6);
        assert!(AblationConfig::parse_list("LD,bogus").is_err());
    }

    /// Persistent two-state labels over 2012..=2018 with a lag-1 column and
    /// one informative feature.
    fn constant_matrix() -> DesignMatrix {
        let order = FeatureOrder::new(1);
        let lag = order.target_lag_index(1).unwrap();
        let mut rows = Vec::new();
        for occ in 0..12 {
            let status = occ % 3 == 0;
            for year in 2012..=2018 {
                let mut values = vec![None; order.len()];
                values[0] = Some(if status { 5.0 } else { 1.0 } + occ as f64 * 0.01);
                if year > 2012 {
                    values[lag] = Some(if status { 1.0 } else { 0.0 });
                }
                rows.push(FeatureRow {
                    occupation: OccupationCode::new(&format!("2{:02}111", occ + 10)).unwrap(),
                    year,
                    values,
                    label: ShortageStatus::from_bool(status),
                });
            }
        }
        DesignMatrix { order, rows }
    }

    #[test]
    fn ablation_on_constant_labels() {
        let m = constant_matrix();
        let settings = AblationSettings {
            train_end: 2016,
            search: SearchSettings {
                iterations: 2,
                folds: 3,
                seed: 1,
                parallel: false,
            },
        };
        let configs = [AblationConfig::LD, AblationConfig::Naive];
        let out = run_ablation(&m, &configs, &settings).unwrap();
        assert_eq!(out.rows.len(), 4);
        let naive = out.report(AblationConfig::Naive, Subset::FullTest).unwrap();
        assert_eq!(naive.macro_f1, 1.0);
        assert_eq!(naive.n_rows, 24);
        assert_eq!(out.report(AblationConfig::Naive, Subset::ChangeSubset).unwrap().n_rows, 0);
        assert_eq!(out.fitted.len(), 1);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ablation_report.csv");
        write_ablation_report(&path, &out.rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with(&ABLATION_HEADER.join(",")));
    }
}
