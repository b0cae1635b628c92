//! Feature-subset ablation on default synthetic data: every configuration
//! gets its own random search, a refit on the training years, and scores on
//! the test years and on the test rows whose shortage status changed. The
//! LD_plus_LS model's gain importance shows which planted features it found.
//!
//! ```text
//! cargo run --release --example ablation_study -- [ITERATIONS] [SEED] [--no-signal]
//! ```
//!
//! 200 iterations take a few minutes on one core.

use skillgap::boost::gain_importance;
use skillgap::eval::{change_subset, majority_predict, macro_report, run_ablation, AblationConfig, AblationSettings, Subset};
use skillgap::features::{design_matrix_from_corpus, temporal_split, MatrixOptions};
use skillgap::synth::{generate, SynthParams};
use skillgap::tune::SearchSettings;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let iterations = args.first().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let seed = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let mut params = SynthParams {
        seed,
        ..SynthParams::default()
    };
    if args.iter().any(|a| a == "--no-signal") {
        params = params.without_signal();
    }

    let data = generate(&params)?;
    let matrix = design_matrix_from_corpus(
        &data.job_ads,
        &data.taxonomy,
        &data.labor_supply,
        &data.labels,
        MatrixOptions::default(),
    )?;
    let settings = AblationSettings {
        train_end: 2016,
        search: SearchSettings {
            iterations,
            seed,
            ..SearchSettings::default()
        },
    };
    let outcome = run_ablation(&matrix, &AblationConfig::ALL, &settings)?;

    println!("{:<16} {:<14} {:>6} {:>6} {:>6} {:>5}", "config", "subset", "P", "R", "F1", "n");
    for row in &outcome.rows {
        let r = &row.report;
        println!(
            "{:<16} {:<14} {:>6.3} {:>6.3} {:>6.3} {:>5}",
            row.config.name(),
            row.subset.as_str(),
            r.macro_precision,
            r.macro_recall,
            r.macro_f1,
            r.n_rows
        );
    }

    // the majority class of the training years, predicted for every changed row
    let (train, test) = temporal_split(&matrix, 2016)?;
    let changed = change_subset(&test);
    if !changed.is_empty() {
        let majority = vec![majority_predict(&train.labels()); changed.len()];
        let f1 = macro_report(&majority, &changed.labels())?.macro_f1;
        let ld_ls = outcome
            .report(AblationConfig::LD_plus_LS, Subset::ChangeSubset)
            .map_or(0.0, |r| r.macro_f1);
        println!("\nchange subset: LD_plus_LS {ld_ls:.3} vs majority class {f1:.3}");
    }

    if let Some(model) = outcome.model(AblationConfig::LD_plus_LS) {
        println!("\nLD_plus_LS gain importance");
        for f in gain_importance(model).iter().take(8) {
            println!("  {:<36} {:.3}", f.feature, f.share);
        }
    }
    Ok(())
}
