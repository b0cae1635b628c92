use log::warn;

use crate::features::{DesignMatrix, FeatureRow};

/// Previous year's status, or `None` when the row has no lag-1 target.
pub fn naive_predict(matrix: &DesignMatrix, row: &FeatureRow) -> Option<bool> {
    matrix.lagged_status(row, 1).map(|s| s.is_shortage())
}

/// Naive predictions for every row that has a lag-1 target, with the
/// indices of those rows. Rows without one are dropped with a warning.
pub fn naive_predictions(matrix: &DesignMatrix) -> (Vec<usize>, Vec<bool>) {
    let mut kept = Vec::new();
    let mut preds = Vec::new();
    for (i, row) in matrix.rows.iter().enumerate() {
        if let Some(p) = naive_predict(matrix, row) {
            kept.push(i);
            preds.push(p);
        }
    }
    let dropped = matrix.len() - kept.len();
    if dropped > 0 {
        warn!("naive baseline: {dropped} rows without a lag-1 target excluded");
    }
    (kept, preds)
}

/// The more frequent training label; ties go to not-in-shortage.
pub fn majority_predict(train_labels: &[bool]) -> bool {
    let pos = train_labels.iter().filter(|&&y| y).count();
    2 * pos > train_labels.len()
}

/// Rows whose label differs from the lag-1 target. Rows without a lag-1
/// target never qualify.
pub fn change_subset(matrix: &DesignMatrix) -> DesignMatrix {
    matrix.filter(|r| naive_predict(matrix, r).is_some_and(|p| p != r.label.is_shortage()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{OccupationCode, ShortageStatus};
    use crate::features::FeatureOrder;

    fn matrix(rows: &[(i32, Option<f64>, bool)]) -> DesignMatrix {
        let order = FeatureOrder::new(1);
        let lag = order.target_lag_index(1).unwrap();
        let rows = rows
            .iter()
            .map(|&(year, prev, label)| {
                let mut values = vec![None; order.len()];
                values[lag] = prev;
                FeatureRow {
                    occupation: OccupationCode::new("232111").unwrap(),
                    year,
                    values,
                    label: ShortageStatus::from_bool(label),
                }
            })
            .collect();
        DesignMatrix { order, rows }
    }

    #[test]
    fn naive_copies_lag_one() {
        let m = matrix(&[(2012, None, false), (2013, Some(0.0), true), (2014, Some(1.0), true)]);
        assert_eq!(naive_predict(&m, &m.rows[0]), None);
        assert_eq!(naive_predict(&m, &m.rows[2]), Some(true));
        let (kept, preds) = naive_predictions(&m);
        assert_eq!(kept, [1, 2]);
        assert_eq!(preds, [false, true]);
    }

    #[test]
    fn change_subset_keeps_flips_only() {
        let m = matrix(&[(2012, None, false), (2013, Some(0.0), true), (2014, Some(1.0), true)]);
        let c = change_subset(&m);
        assert_eq!(c.rows.len(), 1);
        assert_eq!(c.rows[0].year, 2013);
        let (_, preds) = naive_predictions(&c);
        assert!(preds.iter().zip(c.labels()).all(|(p, y)| *p != y));
    }

    #[test]
    fn majority() {
        assert!(!majority_predict(&[true, false, false]));
        assert!(majority_predict(&[true, true, false]));
        assert!(!majority_predict(&[true, false]));
    }
}
