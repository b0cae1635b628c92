use std::collections::BTreeMap;

use crate::corpus::{LaborSupplyRecord, OccupationCode, SupplyMetric};

/// Yearly means of quarterly supply metrics, keyed at the level each metric
/// is published (unit, sub-major or major group).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SupplyTable {
    yearly: BTreeMap<(OccupationCode, i32, SupplyMetric), f64>,
}

impl SupplyTable {
    pub fn get(&self, code: &OccupationCode, year: i32, metric: SupplyMetric) -> Option<f64> {
        self.yearly.get(&(code.clone(), year, metric)).copied()
    }

    /// The 20 supply features for an occupation, resolved through its
    /// ancestors at each metric's level.
    pub fn for_occupation(&self, occupation: &OccupationCode, year: i32) -> [Option<f64>; 20] {
        let mut out = [None; 20];
        for (slot, metric) in out.iter_mut().zip(SupplyMetric::ALL) {
            *slot = occupation
                .ancestor(metric.level())
                .and_then(|code| self.get(&code, year, metric));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.yearly.len()
    }

    pub fn is_empty(&self) -> bool {
        self.yearly.is_empty()
    }

    /// Published codes with at least one value.
    pub fn codes(&self) -> Vec<OccupationCode> {
        let mut codes: Vec<_> = self.yearly.keys().map(|(c, _, _)| c.clone()).collect();
        codes.dedup();
        codes
    }
}

/// Averages each metric's present quarterly values within a year.
pub fn supply_features(records: &[LaborSupplyRecord]) -> SupplyTable {
    let mut acc: BTreeMap<(OccupationCode, i32, SupplyMetric), (f64, u32)> = BTreeMap::new();
    for r in records {
        let e = acc
            .entry((r.occupation.clone(), r.year, r.metric))
            .or_default();
        e.0 += r.value;
        e.1 += 1;
    }
    SupplyTable {
        yearly: acc
            .into_iter()
            .map(|(k, (sum, n))| (k, sum / f64::from(n)))
            .collect(),
    }
}
