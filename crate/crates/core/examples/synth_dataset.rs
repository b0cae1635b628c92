//! Generates a synthetic corpus whose labels match the reference profile
//! (924 occupation-years, 206 in shortage, at most 20 status changes a year)
//! and writes the four input files plus a manifest.
//!
//! ```text
//! cargo run --release --example synth_dataset -- [OUT_DIR] [ADS_LO ADS_HI]
//! ```
//!
//! With no arguments it regenerates the bundled sample in `data/sample`.

use std::path::PathBuf;

use skillgap::corpus::profile_dataset;
use skillgap::synth::{self, SynthParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args
        .first()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample"));
    // few ads per occupation-year keeps the bundled files small
    let ads = match (args.get(1), args.get(2)) {
        (Some(lo), Some(hi)) => (lo.parse()?, hi.parse()?),
        _ => (4, 8),
    };
    let base = SynthParams {
        ads_per_occupation_year: ads,
        ..SynthParams::default()
    };

    let seed = synth::find_calibrated_seed(&base, 206, 20, 0, 10_000)?;
    let data = synth::generate(&SynthParams { seed, ..base })?;
    synth::write_dataset(&out, &data)?;

    let profile = profile_dataset(&data.labels)?;
    println!("seed {seed} -> {}", out.display());
    println!(
        "{} ads, {} labels, {} in shortage, top two major groups {:.1}%",
        data.job_ads.len(),
        profile.rows,
        profile.in_shortage,
        100.0 * profile.top_two_share()
    );
    for y in &profile.flips_by_year {
        println!(
            "  {}: {} changes ({} into shortage)",
            y.year, y.flips, y.to_shortage
        );
    }
    Ok(())
}
