//! Fits the boosted tree classifier on the training years of the bundled
//! sample, scores the held-out years, and round-trips the model through
//! JSON.
//!
//! ```text
//! cargo run --release --example train_booster -- [ROUNDS] [DEPTH]
//! ```

use std::path::Path;

use skillgap::boost::{gain_importance, train, BoostConfig, TreeEnsemble};
use skillgap::corpus::{parse_job_ads, parse_labor_supply, parse_shortage_labels};
use skillgap::eval::{ablation_columns, macro_report, matrix_dataset, AblationConfig};
use skillgap::features::{design_matrix_from_corpus, temporal_split, MatrixOptions};
use skillgap::tune::{full_balance_ratio, oversample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let num_rounds = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let max_depth = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample");
    let (ads, taxonomy) = parse_job_ads(&dir.join("job_ads.csv"), &dir.join("skill_taxonomy.csv"))?;
    let supply = parse_labor_supply(&dir.join("labor_supply.csv"))?;
    let labels = parse_shortage_labels(&dir.join("shortage_labels.csv"))?;
    let matrix = design_matrix_from_corpus(
        &ads.records,
        &taxonomy,
        &supply.records,
        &labels,
        MatrixOptions::default(),
    )?;
    let (train_rows, test_rows) = temporal_split(&matrix, 2016)?;
    let columns = ablation_columns(&matrix.order, AblationConfig::AllIn);

    // duplicate minority rows until the classes balance
    let y = train_rows.labels();
    let idx = oversample(&y, full_balance_ratio(&y)?, 1)?;
    let data = matrix_dataset(&train_rows, &columns).select_rows(&idx);
    let y: Vec<bool> = idx.iter().map(|&i| y[i]).collect();

    let config = BoostConfig {
        num_rounds,
        max_depth,
        ..BoostConfig::default()
    };
    let model = train(&data, &y, &config)?;
    let probs = model.predict_dataset(&matrix_dataset(&test_rows, &columns))?;
    let preds: Vec<bool> = probs.iter().map(|&p| p >= 0.5).collect();
    let report = macro_report(&preds, &test_rows.labels())?;
    println!(
        "{} trees on {} rows; test macro-F1 {:.3} (in shortage F1 {:.3}, not in shortage F1 {:.3})",
        model.trees.len(),
        data.n_rows(),
        report.macro_f1,
        report.class1.f1,
        report.class0.f1
    );

    let json = model.to_json()?;
    let back = TreeEnsemble::from_json(&json)?;
    assert_eq!(back.to_json()?, json);
    println!("model JSON: {} bytes, round-trips exactly", json.len());

    for f in gain_importance(&model).iter().take(5) {
        println!("  {:<36} {:.3}", f.feature, f.share);
    }
    Ok(())
}
