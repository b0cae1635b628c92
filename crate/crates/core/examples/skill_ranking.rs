//! Ranks the skills of one occupation-year two ways. Raw frequency puts
//! generic skills such as "communication skills" on top for almost every
//! occupation; RCA discounts skills that are common across the whole corpus
//! and surfaces the ones specific to the occupation.
//!
//! ```text
//! cargo run --release --example skill_ranking -- [OCCUPATION_CODE] [YEAR]
//! ```

use skillgap::corpus::OccupationCode;
use skillgap::skills::{occupation_skill_weights, top_skills, RankMode, SkillCorpusIndex};
use skillgap::synth::{generate, SynthParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&SynthParams::default())?;
    let index = SkillCorpusIndex::build(&data.job_ads)?;

    let mut args = std::env::args().skip(1);
    let occupation = match args.next() {
        Some(code) => OccupationCode::new(&code)?,
        None => data.labels[0].occupation.clone(),
    };
    let year: i32 = args.next().map(|y| y.parse()).transpose()?.unwrap_or(2015);

    let records = occupation_skill_weights(&index, &occupation, year)?;
    println!(
        "{occupation} in {year}: {} ads, {} distinct skills",
        index.jobs_for(&occupation, year).len(),
        records.len()
    );
    for mode in [RankMode::Frequency, RankMode::Rca] {
        println!("\ntop 10 by {}", mode.as_str());
        for r in top_skills(&records, mode, 10, 5)? {
            println!(
                "  {:>2}. {:<28} freq {:>3}  rca {:.3}",
                r.rank, r.record.skill, r.record.frequency, r.record.mean_rca
            );
        }
    }
    Ok(())
}
