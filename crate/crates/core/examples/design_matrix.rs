//! Builds the occupation-year design matrix from the bundled sample: 12
//! demand features from job ads, 20 supply features, and their lagged copies
//! plus lagged shortage status. Then splits it by year.
//!
//! ```text
//! cargo run --release --example design_matrix -- [LAGS] [OUT_DIR]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use skillgap::corpus::{parse_job_ads, parse_labor_supply, parse_shortage_labels};
use skillgap::eval::change_subset;
use skillgap::features::{
    design_matrix_from_corpus, temporal_split, write_design_matrix, MatrixOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let lags: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample");

    let (ads, taxonomy) = parse_job_ads(&dir.join("job_ads.csv"), &dir.join("skill_taxonomy.csv"))?;
    let supply = parse_labor_supply(&dir.join("labor_supply.csv"))?;
    let labels = parse_shortage_labels(&dir.join("shortage_labels.csv"))?;
    let options = MatrixOptions {
        lags,
        ..MatrixOptions::default()
    };
    let matrix =
        design_matrix_from_corpus(&ads.records, &taxonomy, &supply.records, &labels, options)?;

    let mut classes: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &matrix.order.columns {
        *classes.entry(c.class()).or_default() += 1;
    }
    println!("{} rows x {} columns", matrix.len(), matrix.order.len());
    for (class, n) in &classes {
        println!("  {class:<12} {n}");
    }

    let (train, test) = temporal_split(&matrix, 2016)?;
    println!(
        "train {} rows ({:?}), test {} rows ({:?}), {} test rows changed status",
        train.len(),
        train.years(),
        test.len(),
        test.years(),
        change_subset(&test).len()
    );

    if let Some(out) = args.next().map(PathBuf::from) {
        write_design_matrix(&out, &matrix)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
