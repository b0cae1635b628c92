//! Random hyper-parameter search with oversampling inside each
//! cross-validation fold. Candidates are scored by mean macro-F1 over the
//! folds; the same seed yields the same winner with or without threads.
//!
//! ```text
//! cargo run --release --example random_search -- [ITERATIONS] [FOLDS] [SEED]
//! ```

use std::path::Path;

use skillgap::corpus::{parse_job_ads, parse_labor_supply, parse_shortage_labels};
use skillgap::eval::{ablation_columns, matrix_dataset, AblationConfig};
use skillgap::features::{design_matrix_from_corpus, temporal_split, MatrixOptions};
use skillgap::tune::{randomized_search, SearchSettings, SearchSpace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let folds = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

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
    let (train_rows, _) = temporal_split(&matrix, 2016)?;
    let y = train_rows.labels();
    let data = matrix_dataset(
        &train_rows,
        &ablation_columns(&matrix.order, AblationConfig::LD_plus_LS),
    );

    let space = SearchSpace::for_labels(&y)?;
    println!(
        "oversample multiplier searched in [{:.3}, {:.3}]",
        space.oversample_multiplier.lo, space.oversample_multiplier.hi
    );
    let settings = SearchSettings {
        iterations,
        folds,
        seed,
        parallel: true,
    };
    let outcome = randomized_search(&data, &y, &space, &settings)?;

    let mut ranked: Vec<_> = outcome.trace.iter().enumerate().collect();
    ranked.sort_by(|a, b| b.1.mean_macro_f1.total_cmp(&a.1.mean_macro_f1).then(a.0.cmp(&b.0)));
    for (i, r) in ranked.iter().take(5) {
        let b = &r.config.boost;
        println!(
            "draw {i:>3}: cv macro-F1 {:.3}  rounds {} depth {} lr {:.3} multiplier {:.2}",
            r.mean_macro_f1, b.num_rounds, b.max_depth, b.learning_rate, r.config.oversample_multiplier
        );
    }

    let serial = randomized_search(&data, &y, &space, &SearchSettings { parallel: false, ..settings })?;
    assert_eq!(serial.best_index, outcome.best_index);
    println!("winner is draw {} with or without threads", outcome.best_index);
    Ok(())
}
