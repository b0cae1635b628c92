use serde::Serialize;

use super::EvalError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    /// Counts with `positive` as the positive class.
    pub fn tally(preds: &[bool], labels: &[bool], positive: bool) -> Self {
        let mut c = ConfusionCounts::default();
        for (&p, &y) in preds.iter().zip(labels) {
            match (p == positive, y == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 of one class; every 0/0 is taken as 0.
pub fn class_metrics(c: &ConfusionCounts) -> ClassMetrics {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    FullTest,
    ChangeSubset,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::FullTest => "full_test",
            Subset::ChangeSubset => "change_subset",
        }
    }
}

/// Per-class and macro scores. Class 1 is in-shortage (`true`), class 0
/// not-in-shortage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub n_rows: usize,
    pub class1_counts: ConfusionCounts,
    pub class0_counts: ConfusionCounts,
    pub class1: ClassMetrics,
    pub class0: ClassMetrics,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl EvaluationReport {
    /// All-zero report for an empty evaluation set.
    pub fn empty() -> Self {
        EvaluationReport {
            n_rows: 0,
            class1_counts: ConfusionCounts::default(),
            class0_counts: ConfusionCounts::default(),
            class1: ClassMetrics::default(),
            class0: ClassMetrics::default(),
            macro_precision: 0.0,
            macro_recall: 0.0,
            macro_f1: 0.0,
        }
    }
}

pub fn macro_report(preds: &[bool], labels: &[bool]) -> Result<EvaluationReport, EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let class1_counts = ConfusionCounts::tally(preds, labels, true);
    let class0_counts = ConfusionCounts::tally(preds, labels, false);
    let class1 = class_metrics(&class1_counts);
    let class0 = class_metrics(&class0_counts);
    Ok(EvaluationReport {
        n_rows: preds.len(),
        class1_counts,
        class0_counts,
        class1,
        class0,
        macro_precision: (class1.precision + class0.precision) / 2.0,
        macro_recall: (class1.recall + class0.recall) / 2.0,
        macro_f1: (class1.f1 + class0.f1) / 2.0,
    })
}

/// Macro-F1 alone; used as the tuning objective.
pub fn macro_f1(preds: &[bool], labels: &[bool]) -> Result<f64, EvalError> {
    Ok(macro_report(preds, labels)?.macro_f1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cm(tp: u64, fp: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_, tn: 0 }
    }

    #[test]
    fn class_metric_examples() {
        let m = class_metrics(&cm(1, 1, 1));
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        let m = class_metrics(&cm(0, 0, 0));
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        let m = class_metrics(&cm(5, 0, 0));
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_confusion_example() {
        let labels = [true, true, false, false, false];
        let preds = [true, false, false, false, true];
        let r = macro_report(&preds, &labels).unwrap();
        // class 1: tp 1, fp 1, fn 1; class 0: tp 2, fp 1, fn 1
        assert_eq!(r.class1_counts, ConfusionCounts { tp: 1, fp: 1, fn_: 1, tn: 2 });
        assert!((r.class1.f1 - 0.5).abs() < 1e-15);
        assert!((r.class0.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.macro_f1 - 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_inverted() {
        let labels = [true, false, true, false];
        assert_eq!(macro_f1(&labels, &labels).unwrap(), 1.0);
        let inv: Vec<bool> = labels.iter().map(|b| !b).collect();
        assert_eq!(macro_f1(&inv, &labels).unwrap(), 0.0);
        assert!(macro_report(&[true], &[true, false]).is_err());
        assert!(macro_report(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn invariants(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
            let (preds, labels): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let r = macro_report(&preds, &labels).unwrap();
            prop_assert_eq!(r.class1_counts.total() as usize, preds.len());
            for m in [r.class1, r.class0] {
                for v in [m.precision, m.recall, m.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-15);
            }
            // swapping the class encoding swaps the per-class rows
            let np: Vec<bool> = preds.iter().map(|b| !b).collect();
            let nl: Vec<bool> = labels.iter().map(|b| !b).collect();
            let s = macro_report(&np, &nl).unwrap();
            prop_assert_eq!(s.class1, r.class0);
            prop_assert_eq!(s.class0, r.class1);
            prop_assert!((s.macro_f1 - r.macro_f1).abs() < 1e-15);
        }
    }
}
