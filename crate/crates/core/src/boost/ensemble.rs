use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::split::{BinnedColumn, SplitParams};
use super::tree::{Grower, Tree};
use super::{logit, sigmoid, BoostConfig, BoostError, Dataset};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    /// Learn a default direction for missing values at each split. When
    /// off, missing values always go left.
    pub missing_routing: bool,
    /// Reject training sets that contain only one class.
    pub require_both_classes: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            missing_routing: true,
            require_both_classes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub config: BoostConfig,
    pub feature_order: Vec<String>,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Cumulative split gain per feature, aligned with `feature_order`.
    pub gain: Vec<f64>,
}

impl TreeEnsemble {
    /// An ensemble with no trees; predicts `config.base_score` everywhere.
    pub fn empty(config: BoostConfig, feature_order: Vec<String>) -> Self {
        let n = feature_order.len();
        TreeEnsemble {
            base_score: config.base_score,
            config,
            feature_order,
            trees: Vec::new(),
            gain: vec![0.0; n],
        }
    }

    fn margin(&self, value: impl Fn(usize) -> Option<f64> + Copy) -> f64 {
        self.trees
            .iter()
            .fold(logit(self.base_score), |m, t| m + t.predict(value))
    }

    pub fn predict_proba(&self, row: &[Option<f64>]) -> Result<f64, BoostError> {
        if row.len() != self.feature_order.len() {
            return Err(BoostError::RowWidth {
                expected: self.feature_order.len(),
                found: row.len(),
            });
        }
        Ok(sigmoid(self.margin(|f| row[f])))
    }

    /// `true` (in shortage) iff the probability reaches `threshold`.
    pub fn classify(&self, row: &[Option<f64>], threshold: f64) -> Result<bool, BoostError> {
        Ok(self.predict_proba(row)? >= threshold)
    }

    /// Probabilities for every row of a dataset with the same vocabulary.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>, BoostError> {
        if data.names() != self.feature_order.as_slice() {
            return Err(BoostError::Vocabulary);
        }
        Ok((0..data.n_rows())
            .map(|r| sigmoid(self.margin(|f| data.value(r, f))))
            .collect())
    }

    pub fn to_json(&self) -> Result<String, BoostError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self, BoostError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), BoostError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BoostError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Trains with the default options.
pub fn train(data: &Dataset, labels: &[bool], config: &BoostConfig) -> Result<TreeEnsemble, BoostError> {
    train_with_options(data, labels, config, TrainOptions::default())
}

pub fn train_with_options(
    data: &Dataset,
    labels: &[bool],
    config: &BoostConfig,
    options: TrainOptions,
) -> Result<TreeEnsemble, BoostError> {
    config.validate()?;
    let n = data.n_rows();
    if labels.len() != n {
        return Err(BoostError::LabelMismatch {
            rows: n,
            labels: labels.len(),
        });
    }
    if n < 2 {
        return Err(BoostError::TooFewRows(n));
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if options.require_both_classes && (positives == 0 || positives == n) {
        return Err(BoostError::SingleClass);
    }

    let n_features = data.n_features();
    let columns: Vec<BinnedColumn> = (0..n_features)
        .map(|f| BinnedColumn::new(data.column(f)))
        .collect();
    let params = SplitParams {
        reg_lambda: config.reg_lambda,
        gamma: config.gamma,
        min_child_weight: config.min_child_weight,
    };
    let n_sample_rows = ((config.subsample_rows * n as f64).round() as usize).clamp(1, n);
    let n_sample_cols = ((config.colsample * n_features as f64).round() as usize).clamp(1, n_features.max(1));

    let mut ensemble = TreeEnsemble::empty(config.clone(), data.names().to_vec());
    let mut margins = vec![logit(config.base_score); n];
    let mut gh = vec![(0.0, 0.0); n];
    let mut grower = Grower::new(
        &columns,
        params,
        options.missing_routing,
        config.max_depth,
        config.learning_rate,
        n,
    );
    let mut in_sample = vec![true; n];
    let all_rows: Vec<u32> = (0..n as u32).collect();
    let all_features: Vec<usize> = (0..n_features).collect();

    for round in 0..config.num_rounds {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            // saturated margins would otherwise give a zero hessian
            gh[i] = (p - if labels[i] { 1.0 } else { 0.0 }, (p * (1.0 - p)).max(1e-16));
        }

        let mut rng = seed::rng(seed::derive_indexed(config.seed, "boost/round", round as u64));
        let rows: Vec<u32> = if n_sample_rows < n {
            let mut picked: Vec<u32> = sample(&mut rng, n, n_sample_rows)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            picked.sort_unstable();
            in_sample.iter_mut().for_each(|s| *s = false);
            for &r in &picked {
                in_sample[r as usize] = true;
            }
            picked
        } else {
            all_rows.clone()
        };
        let features: Vec<usize> = if n_sample_cols < n_features {
            let mut picked = sample(&mut rng, n_features, n_sample_cols).into_vec();
            picked.sort_unstable();
            picked
        } else {
            all_features.clone()
        };

        let (tree, gains) = grower.grow(&gh, &features, &rows, &in_sample);
        for (f, g) in gains {
            ensemble.gain[f] += g;
        }
        for (i, m) in margins.iter_mut().enumerate() {
            *m += tree.predict(|f| data.value(i, f));
        }
        ensemble.trees.push(tree);
    }
    Ok(ensemble)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub index: usize,
    pub gain: f64,
    pub share: f64,
}

/// Features with positive cumulative gain, by gain descending then index.
pub fn gain_importance(ensemble: &TreeEnsemble) -> Vec<FeatureImportance> {
    let total: f64 = ensemble.gain.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut out: Vec<FeatureImportance> = ensemble
        .gain
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > 0.0)
        .map(|(i, &g)| FeatureImportance {
            feature: ensemble.feature_order[i].clone(),
            index: i,
            gain: g,
            share: g / total,
        })
        .collect();
    out.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.index.cmp(&b.index)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::{logistic_loss, Node};
    use rand::Rng;

    fn dataset(rows: &[Vec<Option<f64>>]) -> Dataset {
        let names = (0..rows[0].len()).map(|i| format!("f{i}")).collect();
        Dataset::from_rows(names, rows).unwrap()
    }

    fn xor() -> (Dataset, Vec<bool>) {
        let rows = vec![
            vec![Some(0.0), Some(0.0)],
            vec![Some(0.0), Some(1.0)],
            vec![Some(1.0), Some(0.0)],
            vec![Some(1.0), Some(1.0)],
        ];
        (dataset(&rows), vec![false, true, true, false])
    }

    fn noisy(n: usize, seed: u64, missing: f64) -> (Dataset, Vec<bool>) {
        let mut rng = crate::seed::rng(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = x[0] + 0.5 * x[1] * x[2] + rng.gen_range(-0.3..0.3) > 0.0;
            rows.push(
                x.into_iter()
                    .map(|v| (!rng.gen_bool(missing)).then_some(v))
                    .collect(),
            );
            labels.push(y);
        }
        (dataset(&rows), labels)
    }

    fn mean_loss(ens: &TreeEnsemble, data: &Dataset, labels: &[bool]) -> f64 {
        let probs = ens.predict_dataset(data).unwrap();
        probs
            .iter()
            .zip(labels)
            .map(|(p, &y)| logistic_loss(logit(*p), y))
            .sum::<f64>()
            / labels.len() as f64
    }

    #[test]
    fn all_zero_labels_drive_probabilities_down() {
        let (data, _) = noisy(40, 3, 0.0);
        let labels = vec![false; 40];
        let cfg = BoostConfig {
            num_rounds: 50,
            learning_rate: 0.3,
            ..Default::default()
        };
        assert!(matches!(train(&data, &labels, &cfg), Err(BoostError::SingleClass)));
        let opts = TrainOptions {
            require_both_classes: false,
            ..Default::default()
        };
        let ens = train_with_options(&data, &labels, &cfg, opts).unwrap();
        for p in ens.predict_dataset(&data).unwrap() {
            assert!(p < 0.01, "{p}");
        }
    }

    #[test]
    fn xor_is_learned_at_depth_two() {
        let (data, labels) = xor();
        let cfg = BoostConfig {
            num_rounds: 20,
            learning_rate: 0.3,
            max_depth: 2,
            min_child_weight: 0.0,
            subsample_rows: 0.75,
            seed: 1,
            ..Default::default()
        };
        let ens = train(&data, &labels, &cfg).unwrap();
        let probs = ens.predict_dataset(&data).unwrap();
        for (p, y) in probs.iter().zip(&labels) {
            assert_eq!(*p >= 0.5, *y, "{probs:?}");
        }
    }

    #[test]
    fn loss_never_increases_without_subsampling() {
        for seed in 0..3 {
            let (data, labels) = noisy(120, seed, 0.1);
            let cfg = BoostConfig {
                num_rounds: 40,
                learning_rate: 0.3,
                max_depth: 3,
                seed,
                ..Default::default()
            };
            let full = train(&data, &labels, &cfg).unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..=full.trees.len() {
                let mut partial = full.clone();
                partial.trees.truncate(k);
                let loss = mean_loss(&partial, &data, &labels);
                assert!(loss <= prev + 1e-9, "round {k}: {loss} > {prev}");
                prev = loss;
            }
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let (data, labels) = noisy(150, 5, 0.2);
        let cfg = BoostConfig {
            num_rounds: 15,
            subsample_rows: 0.7,
            colsample: 0.5,
            seed: 42,
            ..Default::default()
        };
        let a = train(&data, &labels, &cfg).unwrap();
        let b = train(&data, &labels, &cfg).unwrap();
        let json = a.to_json().unwrap();
        assert_eq!(json, b.to_json().unwrap());
        let back = TreeEnsemble::from_json(&json).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json().unwrap(), json);
    }

    #[test]
    fn missing_routing_is_inert_without_missing_values() {
        let (data, labels) = noisy(100, 9, 0.0);
        let cfg = BoostConfig {
            num_rounds: 10,
            ..Default::default()
        };
        let on = train(&data, &labels, &cfg).unwrap();
        let off = train_with_options(
            &data,
            &labels,
            &cfg,
            TrainOptions {
                missing_routing: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(on.to_json().unwrap(), off.to_json().unwrap());
    }

    #[test]
    fn leaf_weights_minimize_the_quadratic_objective() {
        let (data, labels) = noisy(80, 13, 0.0);
        let cfg = BoostConfig {
            num_rounds: 1,
            max_depth: 2,
            learning_rate: 1.0,
            ..Default::default()
        };
        let ens = train(&data, &labels, &cfg).unwrap();
        // first round: p = 0.5 everywhere, g = 0.5 - y, h = 0.25
        let tree = &ens.trees[0];
        let mut leaf_stats: std::collections::HashMap<u64, (f64, f64, f64)> = Default::default();
        for i in 0..data.n_rows() {
            let w = tree.predict(|f| data.value(i, f));
            let e = leaf_stats.entry(w.to_bits()).or_insert((w, 0.0, 0.0));
            e.1 += 0.5 - if labels[i] { 1.0 } else { 0.0 };
            e.2 += 0.25;
        }
        let q = |w: f64, g: f64, h: f64| g * w + 0.5 * (h + cfg.reg_lambda) * w * w;
        for (w, g, h) in leaf_stats.values() {
            for eps in [1e-3, -1e-3, 0.1, -0.1] {
                assert!(q(w + eps, *g, *h) >= q(*w, *g, *h));
            }
        }
    }

    #[test]
    fn predictions_ignore_unused_features_and_missing_is_deterministic() {
        let (data, labels) = noisy(100, 21, 0.1);
        let cfg = BoostConfig {
            num_rounds: 5,
            ..Default::default()
        };
        let ens = train(&data, &labels, &cfg).unwrap();
        let used: std::collections::HashSet<usize> = ens
            .trees
            .iter()
            .flat_map(|t| t.nodes.iter())
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                _ => None,
            })
            .collect();
        let row = data.row(0);
        let base = ens.predict_proba(&row).unwrap();
        for f in (0..4).filter(|f| !used.contains(f)) {
            let mut r = row.clone();
            r[f] = Some(1e6);
            assert_eq!(ens.predict_proba(&r).unwrap(), base);
        }
        let blank = vec![None; 4];
        assert_eq!(ens.predict_proba(&blank).unwrap(), ens.predict_proba(&blank).unwrap());
        assert!(ens.predict_proba(&[None; 3]).is_err());
    }

    #[test]
    fn empty_ensemble_predicts_base_score() {
        let ens = TreeEnsemble::empty(BoostConfig::default(), vec!["a".into()]);
        assert_eq!(ens.predict_proba(&[Some(3.0)]).unwrap(), 0.5);
        assert!(gain_importance(&ens).is_empty());
    }

    #[test]
    fn importance_shares() {
        let (data, labels) = noisy(200, 4, 0.0);
        let ens = train(&data, &labels, &BoostConfig::default()).unwrap();
        let imp = gain_importance(&ens);
        let total: f64 = imp.iter().map(|i| i.share).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(imp[0].feature, "f0");
        assert!(imp.windows(2).all(|w| w[0].gain >= w[1].gain));

        // only one informative feature and depth 1 stumps
        let rows: Vec<_> = (0..20).map(|i| vec![Some(i as f64), Some(0.0)]).collect();
        let labels: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let ens = train(
            &dataset(&rows),
            &labels,
            &BoostConfig {
                max_depth: 1,
                num_rounds: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let imp = gain_importance(&ens);
        assert_eq!(imp.len(), 1);
        assert_eq!(imp[0].share, 1.0);
    }
}
