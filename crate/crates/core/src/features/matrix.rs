use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{DemandFeatures, FeatureError, FeatureOrder, SupplyTable, BASE_FEATURE_COUNT};
use crate::corpus::{OccupationCode, ShortageLabel, ShortageStatus};

/// Which year's features a row for year `t` carries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TargetAlignment {
    /// Features of year `t` describe the label of year `t`, which is
    /// published 12-18 months later.
    #[default]
    SameYear,
    /// Features of year `t-1` describe the label of year `t`.
    NextYear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixOptions {
    pub lags: u32,
    pub alignment: TargetAlignment,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            lags: 2,
            alignment: TargetAlignment::SameYear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub occupation: OccupationCode,
    pub year: i32,
    /// Aligned with the matrix's `FeatureOrder`; `None` is a missing value.
    pub values: Vec<Option<f64>>,
    pub label: ShortageStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub order: FeatureOrder,
    pub rows: Vec<FeatureRow>,
}

impl DesignMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn years(&self) -> BTreeSet<i32> {
        self.rows.iter().map(|r| r.year).collect()
    }

    pub fn occupations(&self) -> BTreeSet<&OccupationCode> {
        self.rows.iter().map(|r| &r.occupation).collect()
    }

    pub fn value(&self, row: &FeatureRow, name: &str) -> Result<Option<f64>, FeatureError> {
        let i = self
            .order
            .index_of(name)
            .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))?;
        Ok(row.values[i])
    }

    /// Status `lag` years before the row's year, if known.
    pub fn lagged_status(&self, row: &FeatureRow, lag: u32) -> Option<ShortageStatus> {
        let i = self.order.target_lag_index(lag)?;
        row.values[i].map(|v| ShortageStatus::from_bool(v >= 0.5))
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label.is_shortage()).collect()
    }

    fn with_rows(&self, rows: Vec<FeatureRow>) -> DesignMatrix {
        DesignMatrix {
            order: self.order.clone(),
            rows,
        }
    }

    pub fn filter(&self, keep: impl Fn(&FeatureRow) -> bool) -> DesignMatrix {
        self.with_rows(self.rows.iter().filter(|r| keep(r)).cloned().collect())
    }
}

/// One row per label; base values come from the demand and supply tables,
/// lag-`l` slots copy the base values `l` years earlier and lagged targets
/// copy earlier labels. Source years before the first label year are absent.
pub fn build_design_matrix(
    demand: &BTreeMap<(OccupationCode, i32), DemandFeatures>,
    supply: &SupplyTable,
    labels: &[ShortageLabel],
    options: MatrixOptions,
) -> Result<DesignMatrix, FeatureError> {
    if labels.is_empty() {
        return Err(FeatureError::NoLabels);
    }
    if options.lags == 0 {
        return Err(FeatureError::ZeroLags);
    }
    let order = FeatureOrder::new(options.lags);
    let first_year = labels.iter().map(|l| l.year).min().expect("non-empty");
    let status: HashMap<(&OccupationCode, i32), ShortageStatus> = labels
        .iter()
        .map(|l| ((&l.occupation, l.year), l.status))
        .collect();

    let tracked: BTreeSet<&OccupationCode> = labels.iter().map(|l| &l.occupation).collect();
    let untracked: BTreeSet<&OccupationCode> = demand
        .keys()
        .map(|(o, _)| o)
        .filter(|o| !tracked.contains(o))
        .collect();
    if !untracked.is_empty() {
        warn!(
            "ignoring demand data for {} occupations without labels",
            untracked.len()
        );
    }

    let base = |occ: &OccupationCode, year: i32| -> [Option<f64>; BASE_FEATURE_COUNT] {
        let mut out = [None; BASE_FEATURE_COUNT];
        if year < first_year {
            return out;
        }
        if let Some(d) = demand.get(&(occ.clone(), year)) {
            out[..12].copy_from_slice(d);
        }
        out[12..].copy_from_slice(&supply.for_occupation(occ, year));
        out
    };

    let shift = match options.alignment {
        TargetAlignment::SameYear => 0,
        TargetAlignment::NextYear => 1,
    };
    let mut sorted: Vec<&ShortageLabel> = labels.iter().collect();
    sorted.sort_by(|a, b| (&a.occupation, a.year).cmp(&(&b.occupation, b.year)));

    let rows = sorted
        .into_iter()
        .map(|label| {
            let source = label.year - shift;
            let mut values = Vec::with_capacity(order.len());
            values.extend(base(&label.occupation, source));
            for lag in 1..=options.lags as i32 {
                values.extend(base(&label.occupation, source - lag));
            }
            for lag in 1..=options.lags as i32 {
                values.push(
                    status
                        .get(&(&label.occupation, label.year - lag))
                        .map(|s| s.as_f64()),
                );
            }
            FeatureRow {
                occupation: label.occupation.clone(),
                year: label.year,
                values,
                label: label.status,
            }
        })
        .collect();
    Ok(DesignMatrix { order, rows })
}

/// Rows with `year <= train_end_year` train, the rest test.
pub fn temporal_split(
    matrix: &DesignMatrix,
    train_end_year: i32,
) -> Result<(DesignMatrix, DesignMatrix), FeatureError> {
    let (train, test): (Vec<_>, Vec<_>) = matrix
        .rows
        .iter()
        .cloned()
        .partition(|r| r.year <= train_end_year);
    if train.is_empty() {
        return Err(FeatureError::EmptySplit {
            train_end: train_end_year,
            side: "train",
        });
    }
    if test.is_empty() {
        return Err(FeatureError::EmptySplit {
            train_end: train_end_year,
            side: "test",
        });
    }
    Ok((matrix.with_rows(train), matrix.with_rows(test)))
}

#[derive(Serialize, Deserialize)]
struct OrderEntry {
    name: String,
    class: String,
    source: super::FeatureSource,
    lag: u32,
}

#[derive(Serialize, Deserialize)]
struct OrderFile {
    lags: u32,
    columns: Vec<OrderEntry>,
}

pub const MATRIX_FILE: &str = "design_matrix.csv";
pub const ORDER_FILE: &str = "feature_order.json";

/// Writes `design_matrix.csv` and the `feature_order.json` sidecar into `dir`.
pub fn write_design_matrix(dir: &Path, matrix: &DesignMatrix) -> Result<(), FeatureError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_writer(File::create(dir.join(MATRIX_FILE))?);
    let mut header = vec![
        "occupation_code".to_string(),
        "year".to_string(),
        "label".to_string(),
    ];
    header.extend(matrix.order.names());
    w.write_record(&header)?;
    for row in &matrix.rows {
        let mut rec = vec![
            row.occupation.to_string(),
            row.year.to_string(),
            row.label.token().to_string(),
        ];
        rec.extend(
            row.values
                .iter()
                .map(|v| v.map(|v| v.to_string()).unwrap_or_default()),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;

    let sidecar = OrderFile {
        lags: matrix.order.lags,
        columns: matrix
            .order
            .columns
            .iter()
            .map(|c| OrderEntry {
                name: c.name.clone(),
                class: c.class().to_string(),
                source: c.source,
                lag: c.lag,
            })
            .collect(),
    };
    fs::write(
        dir.join(ORDER_FILE),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    Ok(())
}

pub fn read_design_matrix(dir: &Path) -> Result<DesignMatrix, FeatureError> {
    let sidecar: OrderFile = serde_json::from_str(&fs::read_to_string(dir.join(ORDER_FILE))?)?;
    let order = FeatureOrder::new(sidecar.lags);
    let names: Vec<String> = sidecar.columns.into_iter().map(|c| c.name).collect();
    if names != order.names() {
        return Err(FeatureError::Format(
            "feature_order.json does not match the canonical column order".into(),
        ));
    }
    let mut reader = csv::Reader::from_reader(File::open(dir.join(MATRIX_FILE))?);
    let header = reader.headers()?.clone();
    if header.len() != order.len() + 3
        || header.iter().skip(3).zip(&names).any(|(h, n)| h != n)
    {
        return Err(FeatureError::Format(
            "design_matrix.csv header does not match feature_order.json".into(),
        ));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let bad = |what: &str| FeatureError::Format(format!("{what} in row {:?}", rec.position()));
        let occupation = rec[0].parse().map_err(|_| bad("invalid occupation"))?;
        let year = rec[1].parse().map_err(|_| bad("invalid year"))?;
        let label = ShortageStatus::parse_token(&rec[2]).ok_or_else(|| bad("invalid label"))?;
        let values = rec
            .iter()
            .skip(3)
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>().map(Some).map_err(|_| bad("invalid value"))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(FeatureRow {
            occupation,
            year,
            values,
            label,
        });
    }
    Ok(DesignMatrix { order, rows })
}
