//! Parses the four input files, reports rejected rows, and profiles the
//! shortage labels: status counts per year, major-group coverage, and the
//! number of occupations that change status.
//!
//! ```text
//! cargo run --release --example ingest_profile -- [DATA_DIR]
//! ```

use std::path::PathBuf;

use skillgap::corpus::{parse_job_ads, parse_labor_supply, parse_shortage_labels, profile_dataset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample"));

    let (ads, taxonomy) = parse_job_ads(&dir.join("job_ads.csv"), &dir.join("skill_taxonomy.csv"))?;
    let supply = parse_labor_supply(&dir.join("labor_supply.csv"))?;
    let labels = parse_shortage_labels(&dir.join("shortage_labels.csv"))?;
    println!(
        "job ads: {} of {} rows accepted; {} taxonomy skills",
        ads.records.len(),
        ads.data_rows,
        taxonomy.len()
    );
    println!("labour supply: {} of {} rows accepted", supply.records.len(), supply.data_rows);
    for r in ads.rejections.iter().chain(&supply.rejections).take(10) {
        println!("  rejected line {}: {}", r.line, r.reason);
    }

    let p = profile_dataset(&labels)?;
    println!(
        "\n{} occupation-years over {} occupations: {} in shortage, {} not",
        p.rows, p.occupations, p.in_shortage, p.not_in_shortage
    );
    for g in &p.major_groups {
        println!(
            "  major group {} ({}): {} occupations, {:.1}%",
            g.major,
            g.name,
            g.occupations,
            100.0 * g.share
        );
    }
    for (y, f) in p.status_by_year.iter().zip(std::iter::once(None).chain(p.flips_by_year.iter().map(Some))) {
        let changes = f.map_or("-".to_string(), |f| f.flips.to_string());
        println!("  {}: {:>3} in shortage, {:>3} changed", y.year, y.in_shortage, changes);
    }
    Ok(())
}
