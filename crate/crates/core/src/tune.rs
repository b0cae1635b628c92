//! Minority oversampling, k-fold cross-validation and randomized
//! hyper-parameter search.
//!
//! Seeds are split from one master seed: the candidate draws, the fold
//! shuffle and every fold's oversampling each get their own stream, and
//! candidate `i` trains with boost seed `derive_indexed(seed, "tune/candidate", i)`.
//! All candidates share one fold partition so their scores are comparable.

use std::fs;
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boost::{self, BoostConfig, BoostError, Dataset};
use crate::eval::{self, EvalError};
use crate::seed;

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("oversampling needs both classes present")]
    SingleClass,
    #[error("oversample multiplier must be a finite value >= 1, got {0}")]
    Multiplier(f64),
    #[error("fold count {k} must be between 2 and the row count {n}")]
    Folds { k: usize, n: usize },
    #[error("every fold's training part holds a single class")]
    AllFoldsDegenerate,
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("invalid search space: {0}")]
    Space(String),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error("{0}")]
    Eval(Box<EvalError>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<EvalError> for TuneError {
    fn from(e: EvalError) -> Self {
        TuneError::Eval(Box::new(e))
    }
}

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&y| y).count();
    (pos, labels.len() - pos)
}

/// Majority count over minority count.
pub fn full_balance_ratio(labels: &[bool]) -> Result<f64, TuneError> {
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(TuneError::SingleClass);
    }
    Ok(pos.max(neg) as f64 / pos.min(neg) as f64)
}

/// Row indices of the oversampled set: every original row in order, then
/// minority rows drawn with replacement until the minority count reaches
/// `round(multiplier * minority)`. With equal class counts the positive
/// class is treated as the minority.
pub fn oversample(labels: &[bool], multiplier: f64, seed: u64) -> Result<Vec<usize>, TuneError> {
    if !(multiplier.is_finite() && multiplier >= 1.0) {
        return Err(TuneError::Multiplier(multiplier));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(TuneError::SingleClass);
    }
    let minority_class = pos <= neg;
    let minority: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == minority_class).collect();
    let target = (multiplier * minority.len() as f64).round() as usize;
    let mut out: Vec<usize> = (0..labels.len()).collect();
    let mut rng = seed::rng(seed);
    out.extend((minority.len()..target).map(|_| minority[rng.gen_range(0..minority.len())]));
    Ok(out)
}

/// Shuffles `0..n` and cuts it into `k` folds whose sizes differ by at most
/// one; the first `n % k` folds take the extra row.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, TuneError> {
    if k < 2 || k > n {
        return Err(TuneError::Folds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// One fold's row indices into the caller's data.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    /// Oversampled training rows; may repeat minority rows.
    pub train: Vec<usize>,
    /// Held-out rows, each exactly once.
    pub held_out: Vec<usize>,
}

/// Fold plans for k-fold CV, or `None` for a fold whose training part
/// holds a single class.
pub fn fold_plans(
    labels: &[bool],
    k: usize,
    multiplier: f64,
    seed: u64,
) -> Result<Vec<Option<FoldPlan>>, TuneError> {
    let folds = kfold_partition(labels.len(), k, seed::derive(seed, "tune/folds"))?;
    let mut plans = Vec::with_capacity(k);
    for (i, held_out) in folds.iter().enumerate() {
        let mut rest: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        rest.sort_unstable();
        let rest_labels: Vec<bool> = rest.iter().map(|&r| labels[r]).collect();
        let plan = match oversample(
            &rest_labels,
            multiplier,
            seed::derive_indexed(seed, "tune/fold-oversample", i as u64),
        ) {
            Ok(local) => Some(FoldPlan {
                train: local.into_iter().map(|j| rest[j]).collect(),
                held_out: held_out.clone(),
            }),
            Err(TuneError::SingleClass) => None,
            Err(e) => return Err(e),
        };
        plans.push(plan);
    }
    Ok(plans)
}

/// A boosting config plus the oversampling multiplier it was tuned with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedConfig {
    #[serde(flatten)]
    pub boost: BoostConfig,
    pub oversample_multiplier: f64,
}

impl TunedConfig {
    pub fn save(&self, path: &Path) -> Result<(), TuneError> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TuneError> {
        let cfg: TunedConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.boost.validate()?;
        if !(cfg.oversample_multiplier >= 1.0) {
            return Err(TuneError::Multiplier(cfg.oversample_multiplier));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub config: TunedConfig,
    /// Macro-F1 of each scored fold; degenerate folds are absent.
    pub fold_scores: Vec<f64>,
    pub mean_macro_f1: f64,
}

/// Trains on each fold's oversampled training part and scores macro-F1 on
/// its held-out part.
pub fn kfold_cv(
    data: &Dataset,
    labels: &[bool],
    config: &TunedConfig,
    k: usize,
    seed: u64,
) -> Result<CvResult, TuneError> {
    let plans = fold_plans(labels, k, config.oversample_multiplier, seed)?;
    let mut fold_scores = Vec::with_capacity(k);
    for (i, plan) in plans.into_iter().enumerate() {
        let Some(plan) = plan else {
            warn!("fold {i}: training part holds a single class, skipped");
            continue;
        };
        let train_labels: Vec<bool> = plan.train.iter().map(|&r| labels[r]).collect();
        let model = boost::train(&data.select_rows(&plan.train), &train_labels, &config.boost)?;
        let probs = model.predict_dataset(&data.select_rows(&plan.held_out))?;
        let preds: Vec<bool> = probs.iter().map(|&p| p >= 0.5).collect();
        let truth: Vec<bool> = plan.held_out.iter().map(|&r| labels[r]).collect();
        fold_scores.push(eval::macro_f1(&preds, &truth)?);
    }
    if fold_scores.is_empty() {
        return Err(TuneError::AllFoldsDegenerate);
    }
    let mean_macro_f1 = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    Ok(CvResult {
        config: config.clone(),
        fold_scores,
        mean_macro_f1,
    })
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    fn uniform(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }

    fn log_uniform(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo.ln()..=self.hi.ln()).exp().clamp(self.lo, self.hi)
        }
    }

    fn uniform_int(&self, rng: &mut impl Rng) -> usize {
        rng.gen_range(self.lo as usize..=self.hi as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Integer-valued.
    pub num_rounds: Interval,
    /// Log-uniform.
    pub learning_rate: Interval,
    /// Integer-valued.
    pub max_depth: Interval,
    pub min_child_weight: Interval,
    /// Log-uniform.
    pub reg_lambda: Interval,
    pub gamma: Interval,
    pub subsample_rows: Interval,
    pub colsample: Interval,
    pub oversample_multiplier: Interval,
}

impl SearchSpace {
    /// The default space, with the oversampling ceiling at `balance_ratio`.
    pub fn with_balance_ratio(balance_ratio: f64) -> Self {
        SearchSpace {
            num_rounds: Interval::new(50.0, 500.0),
            learning_rate: Interval::new(0.01, 0.3),
            max_depth: Interval::new(2.0, 8.0),
            min_child_weight: Interval::new(0.0, 5.0),
            reg_lambda: Interval::new(0.1, 10.0),
            gamma: Interval::new(0.0, 2.0),
            subsample_rows: Interval::new(0.6, 1.0),
            colsample: Interval::new(0.6, 1.0),
            oversample_multiplier: Interval::new(1.0, balance_ratio.max(1.0)),
        }
    }

    /// The default space sized for these training labels.
    pub fn for_labels(labels: &[bool]) -> Result<Self, TuneError> {
        Ok(Self::with_balance_ratio(full_balance_ratio(labels)?))
    }

    /// A space whose every draw is `config`.
    pub fn point(config: &TunedConfig) -> Self {
        let b = &config.boost;
        SearchSpace {
            num_rounds: Interval::point(b.num_rounds as f64),
            learning_rate: Interval::point(b.learning_rate),
            max_depth: Interval::point(b.max_depth as f64),
            min_child_weight: Interval::point(b.min_child_weight),
            reg_lambda: Interval::point(b.reg_lambda),
            gamma: Interval::point(b.gamma),
            subsample_rows: Interval::point(b.subsample_rows),
            colsample: Interval::point(b.colsample),
            oversample_multiplier: Interval::point(config.oversample_multiplier),
        }
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        let fields = [
            ("num_rounds", self.num_rounds, 1.0),
            ("learning_rate", self.learning_rate, f64::MIN_POSITIVE),
            ("max_depth", self.max_depth, 1.0),
            ("min_child_weight", self.min_child_weight, 0.0),
            ("reg_lambda", self.reg_lambda, f64::MIN_POSITIVE),
            ("gamma", self.gamma, 0.0),
            ("subsample_rows", self.subsample_rows, f64::MIN_POSITIVE),
            ("colsample", self.colsample, f64::MIN_POSITIVE),
            ("oversample_multiplier", self.oversample_multiplier, 1.0),
        ];
        for (name, iv, floor) in fields {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi && iv.lo >= floor) {
                return Err(TuneError::Space(format!("{name}: [{}, {}]", iv.lo, iv.hi)));
            }
        }
        Ok(())
    }

    /// Draws one config. The boost seed is left at 0 for the caller to set.
    pub fn sample(&self, rng: &mut impl Rng) -> TunedConfig {
        let boost = BoostConfig {
            num_rounds: self.num_rounds.uniform_int(rng),
            learning_rate: self.learning_rate.log_uniform(rng),
            max_depth: self.max_depth.uniform_int(rng),
            min_child_weight: self.min_child_weight.uniform(rng),
            reg_lambda: self.reg_lambda.log_uniform(rng),
            gamma: self.gamma.uniform(rng),
            subsample_rows: self.subsample_rows.uniform(rng),
            colsample: self.colsample.uniform(rng),
            ..BoostConfig::default()
        };
        TunedConfig {
            boost,
            oversample_multiplier: self.oversample_multiplier.uniform(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    pub iterations: usize,
    pub folds: usize,
    pub seed: u64,
    /// Evaluate candidates on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            iterations: 2500,
            folds: 5,
            seed: 0,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: TunedConfig,
    pub best_index: usize,
    /// One result per draw, in draw order.
    pub trace: Vec<CvResult>,
}

impl SearchOutcome {
    pub fn best_result(&self) -> &CvResult {
        &self.trace[self.best_index]
    }
}

/// The draw sequence of a search: fully fixed by `(space, iterations, seed)`.
pub fn draw_candidates(space: &SearchSpace, iterations: usize, seed: u64) -> Vec<TunedConfig> {
    let mut rng = seed::rng(seed::derive(seed, "tune/draws"));
    (0..iterations)
        .map(|i| {
            let mut c = space.sample(&mut rng);
            c.boost.seed = seed::derive_indexed(seed, "tune/candidate", i as u64);
            c
        })
        .collect()
}

pub fn randomized_search(
    data: &Dataset,
    labels: &[bool],
    space: &SearchSpace,
    settings: &SearchSettings,
) -> Result<SearchOutcome, TuneError> {
    if settings.iterations == 0 {
        return Err(TuneError::NoIterations);
    }
    space.validate()?;
    let candidates = draw_candidates(space, settings.iterations, settings.seed);
    let cv_seed = seed::derive(settings.seed, "tune/cv");
    let run = |c: &TunedConfig| kfold_cv(data, labels, c, settings.folds, cv_seed);
    let trace: Vec<CvResult> = if settings.parallel {
        candidates.par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        candidates.iter().map(run).collect::<Result<_, _>>()?
    };
    let mut best_index = 0;
    for (i, r) in trace.iter().enumerate() {
        if r.mean_macro_f1 > trace[best_index].mean_macro_f1 {
            best_index = i;
        }
    }
    Ok(SearchOutcome {
        best: trace[best_index].config.clone(),
        best_index,
        trace,
    })
}

pub const TRACE_HEADER: [&str; 13] = [
    "draw_index",
    "num_rounds",
    "learning_rate",
    "max_depth",
    "min_child_weight",
    "reg_lambda",
    "gamma",
    "subsample_rows",
    "colsample",
    "oversample_multiplier",
    "seed",
    "fold_scores",
    "mean_macro_f1",
];

/// Writes `search_trace.csv`; fold scores are `;`-joined.
pub fn write_trace(path: &Path, trace: &[CvResult]) -> Result<(), TuneError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for (i, r) in trace.iter().enumerate() {
        let b = &r.config.boost;
        let folds: Vec<String> = r.fold_scores.iter().map(f64::to_string).collect();
        w.write_record([
            i.to_string(),
            b.num_rounds.to_string(),
            b.learning_rate.to_string(),
            b.max_depth.to_string(),
            b.min_child_weight.to_string(),
            b.reg_lambda.to_string(),
            b.gamma.to_string(),
            b.subsample_rows.to_string(),
            b.colsample.to_string(),
            r.config.oversample_multiplier.to_string(),
            b.seed.to_string(),
            folds.join(";"),
            r.mean_macro_f1.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn labels(pos: usize, neg: usize) -> Vec<bool> {
        let mut v = vec![false; neg];
        v.extend(vec![true; pos]);
        v
    }

    #[test]
    fn oversample_examples() {
        let y = labels(3, 10);
        let idx = oversample(&y, 10.0 / 3.0, 1).unwrap();
        assert_eq!(idx.len(), 20);
        assert_eq!(idx.iter().filter(|&&i| y[i]).count(), 10);
        assert_eq!(&idx[..13], &(0..13).collect::<Vec<_>>()[..]);
        assert_eq!(oversample(&y, 1.0, 1).unwrap(), (0..13).collect::<Vec<_>>());
        assert!(matches!(oversample(&labels(0, 4), 2.0, 1), Err(TuneError::SingleClass)));
        assert!(oversample(&y, 0.5, 1).is_err());
        assert!((full_balance_ratio(&labels(206, 718)).unwrap() - 3.4854).abs() < 1e-4);
    }

    #[test]
    fn partition_sizes() {
        let folds = kfold_partition(7, 7, 3).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1));
        let folds = kfold_partition(11, 3, 3).unwrap();
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), [4, 4, 3]);
        assert!(kfold_partition(3, 1, 0).is_err());
        assert!(kfold_partition(3, 4, 0).is_err());
    }

    #[test]
    fn held_out_rows_are_never_duplicated() {
        let y: Vec<bool> = (0..50).map(|i| i % 5 == 0).collect();
        for plan in fold_plans(&y, 5, 3.0, 9).unwrap().into_iter().flatten() {
            let held: BTreeSet<usize> = plan.held_out.iter().copied().collect();
            assert_eq!(held.len(), plan.held_out.len());
            assert!(plan.train.iter().all(|r| !held.contains(r)));
        }
    }

    fn separable() -> (Dataset, Vec<bool>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let pos = i % 4 == 0;
            rows.push(vec![Some(i as f64 * 0.1), Some(if pos { 1.0 } else { -1.0 })]);
            y.push(pos);
        }
        (Dataset::from_rows(vec!["a".into(), "b".into()], &rows).unwrap(), y)
    }

    fn quick() -> TunedConfig {
        TunedConfig {
            boost: BoostConfig {
                num_rounds: 10,
                learning_rate: 0.3,
                ..Default::default()
            },
            oversample_multiplier: 2.0,
        }
    }

    #[test]
    fn separable_data_scores_perfectly() {
        let (data, y) = separable();
        let r = kfold_cv(&data, &y, &quick(), 5, 4).unwrap();
        assert_eq!(r.fold_scores.len(), 5);
        assert_eq!(r.mean_macro_f1, 1.0);
        assert_eq!(r, kfold_cv(&data, &y, &quick(), 5, 4).unwrap());
    }

    #[test]
    fn search_properties() {
        let (data, y) = separable();
        let space = SearchSpace::for_labels(&y).unwrap();
        let small = |iterations, parallel| SearchSettings {
            iterations,
            folds: 3,
            seed: 5,
            parallel,
        };
        let one = randomized_search(&data, &y, &space, &small(1, true)).unwrap();
        assert_eq!(one.best_index, 0);
        assert_eq!(one.trace.len(), 1);

        let par = randomized_search(&data, &y, &space, &small(4, true)).unwrap();
        let seq = randomized_search(&data, &y, &space, &small(4, false)).unwrap();
        assert_eq!(par, seq);
        assert!(par.trace.iter().all(|r| r.mean_macro_f1 <= par.best_result().mean_macro_f1));

        let mut fixed = quick();
        fixed.boost.seed = 0;
        let point = randomized_search(&data, &y, &SearchSpace::point(&fixed), &small(3, true)).unwrap();
        // identical up to the per-candidate boost seed, which has no effect without subsampling
        let scores: Vec<_> = point.trace.iter().map(|r| r.fold_scores.clone()).collect();
        assert!(scores.windows(2).all(|w| w[0] == w[1]));
        assert!(matches!(
            randomized_search(&data, &y, &space, &small(0, true)),
            Err(TuneError::NoIterations)
        ));
    }

    #[test]
    fn draws_respect_bounds() {
        let space = SearchSpace::with_balance_ratio(3.49);
        for c in draw_candidates(&space, 300, 1) {
            let b = &c.boost;
            assert!((50..=500).contains(&b.num_rounds));
            assert!((0.01..=0.3).contains(&b.learning_rate));
            assert!((2..=8).contains(&b.max_depth));
            assert!((0.0..=5.0).contains(&b.min_child_weight));
            assert!((0.1..=10.0).contains(&b.reg_lambda));
            assert!((0.0..=2.0).contains(&b.gamma));
            assert!((0.6..=1.0).contains(&b.subsample_rows));
            assert!((0.6..=1.0).contains(&b.colsample));
            assert!((1.0..=3.49).contains(&c.oversample_multiplier));
            assert!(b.validate().is_ok());
        }
    }

    #[test]
    fn tuned_config_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("best.json");
        let c = quick();
        c.save(&path).unwrap();
        assert_eq!(TunedConfig::load(&path).unwrap(), c);
        assert_eq!(BoostConfig::load(&path).unwrap(), c.boost);
    }

    proptest! {
        #[test]
        fn oversampling_preserves_rows(
            y in prop::collection::vec(any::<bool>(), 2..40),
            m in 1.0f64..4.0,
            seed in any::<u64>(),
        ) {
            prop_assume!(y.iter().any(|&b| b) && y.iter().any(|&b| !b));
            let idx = oversample(&y, m, seed).unwrap();
            let (pos, neg) = class_counts(&y);
            let minority = pos.min(neg);
            let minority_class = pos <= neg;
            prop_assert_eq!(&idx[..y.len()], &(0..y.len()).collect::<Vec<_>>()[..]);
            let grown = idx.iter().filter(|&&i| y[i] == minority_class).count();
            prop_assert_eq!(grown, (m * minority as f64).round() as usize);
            prop_assert!(idx[y.len()..].iter().all(|&i| y[i] == minority_class));
            let distinct: BTreeSet<usize> = idx.iter().copied().collect();
            prop_assert_eq!(distinct.len(), y.len());
        }
    }
}
