//! Synthetic corpus generator.
//!
//! Labels follow a two-state Markov chain per occupation, started from its
//! stationary distribution. In shortage years, ad salaries and hours-worked
//! supply metrics shift up and ad education and experience requirements
//! shift down. Every shift is `effect` per-observation standard deviations;
//! occupation baselines vary by `heterogeneity` standard deviations.
//!
//! Each occupation draws from its own seed stream, so output does not depend
//! on generation order.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{write_job_ads, write_labor_supply, write_shortage_labels, write_skill_taxonomy};
use crate::corpus::{
    profile_dataset, CodeLevel, CorpusError, JobAd, LaborSupplyRecord, OccupationCode, ShortageLabel,
    ShortageStatus, SkillCategory, SkillTaxonomy, SupplyMetric,
};
use crate::seed;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible synthetic parameters: {0}")]
    Infeasible(String),
    #[error("no seed in [{start}, {end}) meets the label targets")]
    NoCalibratedSeed { start: u64, end: u64 },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub const HEAD_SKILL: &str = "communication skills";
pub const FALLBACK_SKILL: &str = "attention to detail";
const COMMON_SKILLS: [(&str, f64, SkillCategory); 3] = [
    ("teamwork", 0.2, SkillCategory::Baseline),
    ("problem solving", 0.2, SkillCategory::Baseline),
    ("microsoft excel", 0.15, SkillCategory::Software),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_occupations: usize,
    pub first_year: i32,
    pub last_year: i32,
    /// Inclusive range of ads per occupation-year.
    pub ads_per_occupation_year: (usize, usize),
    pub shortage_stationary_share: f64,
    /// Expected share of occupations that change status between two years.
    pub flip_probability: f64,
    pub hours_effect: f64,
    pub salary_effect: f64,
    pub education_effect: f64,
    pub experience_effect: f64,
    pub heterogeneity: f64,
    /// Chance that each optional ad field is left blank.
    pub missing_rate: f64,
    /// Share of the head skill among ads.
    pub head_skill_rate: f64,
    pub specific_skills_per_occupation: usize,
    /// Range the per-ad probability of each occupation-specific skill is
    /// drawn from.
    pub specific_skill_rate: (f64, f64),
    /// `(major group digit, share)`; shares sum to 1.
    pub major_groups: Vec<(u8, f64)>,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_occupations: 132,
            first_year: 2012,
            last_year: 2018,
            ads_per_occupation_year: (20, 40),
            shortage_stationary_share: 206.0 / 924.0,
            flip_probability: 0.1,
            hours_effect: 0.5,
            salary_effect: 0.5,
            education_effect: 0.5,
            experience_effect: 0.5,
            heterogeneity: 0.5,
            missing_rate: 0.1,
            head_skill_rate: 0.85,
            specific_skills_per_occupation: 20,
            specific_skill_rate: (0.25, 0.45),
            major_groups: vec![(2, 0.52), (3, 0.42), (1, 0.02), (4, 0.02), (7, 0.02)],
            seed: 0,
        }
    }
}

impl SynthParams {
    /// The same parameters with every planted shift removed.
    pub fn without_signal(&self) -> Self {
        SynthParams {
            hours_effect: 0.0,
            salary_effect: 0.0,
            education_effect: 0.0,
            experience_effect: 0.0,
            ..self.clone()
        }
    }

    pub fn years(&self) -> std::ops::RangeInclusive<i32> {
        self.first_year..=self.last_year
    }

    /// Transition probabilities `(stay-out -> in, stay-in -> out)` that keep
    /// the stationary share while flipping `flip_probability` of occupations
    /// per year on average.
    pub fn transition_probabilities(&self) -> (f64, f64) {
        let pi = self.shortage_stationary_share;
        let f = self.flip_probability;
        (f / (2.0 * (1.0 - pi)), f / (2.0 * pi))
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |m: String| Err(SynthError::Infeasible(m));
        if self.n_occupations < 2 {
            return fail("n_occupations must be at least 2".into());
        }
        if self.first_year > self.last_year {
            return fail("first_year is after last_year".into());
        }
        let (lo, hi) = self.ads_per_occupation_year;
        if lo < 1 || lo > hi {
            return fail(format!("ads_per_occupation_year ({lo}, {hi}) is not a range of positive counts"));
        }
        let pi = self.shortage_stationary_share;
        if !(pi > 0.0 && pi < 1.0) {
            return fail(format!("shortage_stationary_share {pi} must lie in (0, 1)"));
        }
        let f = self.flip_probability;
        if !(0.0..=1.0).contains(&f) {
            return fail(format!("flip_probability {f} must lie in [0, 1]"));
        }
        let (p01, p10) = self.transition_probabilities();
        if p01 > 1.0 || p10 > 1.0 {
            return fail(format!("flip_probability {f} cannot keep a stationary share of {pi}"));
        }
        let (slo, shi) = self.specific_skill_rate;
        if !(0.0 <= slo && slo <= shi && shi <= 1.0) {
            return fail(format!("specific_skill_rate ({slo}, {shi}) is not a range in [0, 1]"));
        }
        for (name, p) in [("missing_rate", self.missing_rate), ("head_skill_rate", self.head_skill_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} {p} must lie in [0, 1]"));
            }
        }
        for (name, v) in [
            ("hours_effect", self.hours_effect),
            ("salary_effect", self.salary_effect),
            ("education_effect", self.education_effect),
            ("experience_effect", self.experience_effect),
            ("heterogeneity", self.heterogeneity),
        ] {
            if !v.is_finite() {
                return fail(format!("{name} must be finite"));
            }
        }
        if self.major_groups.is_empty() {
            return fail("major_groups is empty".into());
        }
        let mut seen = BTreeSet::new();
        for &(m, share) in &self.major_groups {
            if !(1..=8).contains(&m) || !seen.insert(m) {
                return fail(format!("major group {m} is not a distinct digit in 1..=8"));
            }
            if !(share >= 0.0) {
                return fail(format!("major group {m} has share {share}"));
            }
        }
        let total: f64 = self.major_groups.iter().map(|g| g.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return fail(format!("major group shares sum to {total}"));
        }
        let positive = self.major_groups.iter().filter(|g| g.1 > 0.0).count();
        if positive > self.n_occupations {
            return fail(format!(
                "{positive} major groups cannot each hold an occupation out of {}",
                self.n_occupations
            ));
        }
        if self.n_occupations > 405 * positive {
            return fail("too many occupations for the code scheme".into());
        }
        Ok(())
    }
}

/// Occupation counts per major group by largest remainder, with every
/// positive-share group getting at least one occupation. Ties in the
/// remainder go to the earlier group.
pub fn allocate_groups(n: usize, groups: &[(u8, f64)]) -> Vec<(u8, usize)> {
    let mut counts: Vec<(u8, usize, f64)> = groups
        .iter()
        .map(|&(m, s)| {
            let exact = s * n as f64;
            (m, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let left = n - counts.iter().map(|c| c.1).sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].2.total_cmp(&counts[a].2).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(left) {
        counts[i].1 += 1;
    }
    // guarantee representation by borrowing from the largest group
    for i in 0..counts.len() {
        if groups[i].1 > 0.0 && counts[i].1 == 0 {
            let donor = (0..counts.len()).max_by_key(|&j| (counts[j].1, std::cmp::Reverse(j))).unwrap();
            counts[donor].1 -= 1;
            counts[i].1 += 1;
        }
    }
    counts.into_iter().map(|(m, c, _)| (m, c)).collect()
}

/// The `index`-th occupation code of a major group. Each code has its own
/// unit group; sub-major groups cycle through five digits.
pub fn occupation_code(major: u8, index: usize) -> OccupationCode {
    let code = format!(
        "{major}{}{}{}11",
        1 + index % 5,
        1 + (index / 5) % 9,
        1 + (index / 45) % 9
    );
    OccupationCode::new(&code).expect("generated codes are six digits")
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Base level, per-observation standard deviation.
fn supply_scale(metric: SupplyMetric) -> (f64, f64) {
    use SupplyMetric::*;
    let (base, sd) = match metric {
        UnitTotalEmployed => (20.0, 2.0),
        UnitTotalHoursWorked => (700.0, 70.0),
        SubFtEmployed => (150.0, 10.0),
        SubPtEmployed => (50.0, 5.0),
        SubTotalEmployed => (200.0, 12.0),
        SubFtHoursWorked => (6000.0, 400.0),
        SubPtHoursWorked => (900.0, 90.0),
        SubTotalHoursWorked => (6900.0, 450.0),
        MajorFtEmployed => (900.0, 40.0),
        MajorPtEmployed => (300.0, 20.0),
        MajorTotalEmployed => (1200.0, 50.0),
        MajorFtHoursWorked => (36000.0, 1500.0),
        MajorPtHoursWorked => (5400.0, 300.0),
        MajorTotalHoursWorked => (41400.0, 1700.0),
        MajorUnemployedFtSeekers => (20.0, 2.0),
        MajorUnemployedPtSeekers => (10.0, 1.0),
        MajorUnemployedTotalSeekers => (30.0, 2.5),
        MajorTotalWeeksSearching => (40.0, 4.0),
        MajorUnderemployedTotal => (30.0, 3.0),
        MajorUnderemployedRatio => (0.08, 0.01),
    };
    (base, sd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCounts {
    pub occupations: usize,
    pub job_ads: usize,
    pub labor_supply_records: usize,
    pub labels: usize,
    pub in_shortage: usize,
    pub not_in_shortage: usize,
    pub taxonomy_skills: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub params: SynthParams,
    pub counts: SynthCounts,
    /// Status changes keyed by the later year of each pair.
    pub flips_by_year: BTreeMap<i32, usize>,
    pub total_flips: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub job_ads: Vec<JobAd>,
    pub taxonomy: SkillTaxonomy,
    pub labor_supply: Vec<LaborSupplyRecord>,
    pub labels: Vec<ShortageLabel>,
    pub manifest: SynthManifest,
}

pub const JOB_ADS_FILE: &str = "job_ads.csv";
pub const TAXONOMY_FILE: &str = "skill_taxonomy.csv";
pub const SUPPLY_FILE: &str = "labor_supply.csv";
pub const LABELS_FILE: &str = "shortage_labels.csv";
pub const MANIFEST_FILE: &str = "synth_manifest.json";

struct Occupation {
    code: OccupationCode,
    statuses: Vec<bool>,
    /// Baseline offsets in standard deviations: salary, education, experience.
    offsets: [f64; 3],
    skills: Vec<(String, f64, SkillCategory)>,
}

fn simulate_statuses(params: &SynthParams, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let (p01, p10) = params.transition_probabilities();
    let mut state = rng.gen_bool(params.shortage_stationary_share);
    let mut out = vec![state];
    for _ in params.first_year..params.last_year {
        let flip = if state { p10 } else { p01 };
        if rng.gen_bool(flip) {
            state = !state;
        }
        out.push(state);
    }
    out
}

fn occupations(params: &SynthParams) -> Vec<Occupation> {
    let mut out = Vec::with_capacity(params.n_occupations);
    for (major, count) in allocate_groups(params.n_occupations, &params.major_groups) {
        for i in 0..count {
            let code = occupation_code(major, i);
            let mut label_rng = seed::rng(seed::derive(params.seed, &format!("synth/labels/{code}")));
            let statuses = simulate_statuses(params, &mut label_rng);
            let mut rng = seed::rng(seed::derive(params.seed, &format!("synth/profile/{code}")));
            let h = params.heterogeneity;
            let offsets = [h * normal(&mut rng), h * normal(&mut rng), h * normal(&mut rng)];
            let skills = (0..params.specific_skills_per_occupation)
                .map(|k| {
                    let category = if rng.gen_bool(0.7) {
                        SkillCategory::Specialized
                    } else {
                        SkillCategory::Software
                    };
                    (format!("skill {code} {k:02}"), rng.gen_range(params.specific_skill_rate.0..=params.specific_skill_rate.1), category)
                })
                .collect();
            out.push(Occupation {
                code,
                statuses,
                offsets,
                skills,
            });
        }
    }
    out
}

/// Shortage labels only; much cheaper than a full `generate`.
pub fn generate_labels(params: &SynthParams) -> Result<Vec<ShortageLabel>, SynthError> {
    params.validate()?;
    Ok(labels_of(params, &occupations(params)))
}

fn labels_of(params: &SynthParams, occs: &[Occupation]) -> Vec<ShortageLabel> {
    let mut labels: Vec<ShortageLabel> = occs
        .iter()
        .flat_map(|o| {
            params.years().zip(&o.statuses).map(|(year, &s)| ShortageLabel {
                occupation: o.code.clone(),
                year,
                status: ShortageStatus::from_bool(s),
            })
        })
        .collect();
    labels.sort_by(|a, b| (&a.occupation, a.year).cmp(&(&b.occupation, b.year)));
    labels
}

fn maybe(rng: &mut ChaCha8Rng, missing_rate: f64, v: f64) -> Option<f64> {
    (!rng.gen_bool(missing_rate)).then_some(v)
}

fn ads_for(params: &SynthParams, occ: &Occupation) -> Vec<JobAd> {
    let mut rng = seed::rng(seed::derive(params.seed, &format!("synth/ads/{}", occ.code)));
    let (lo, hi) = params.ads_per_occupation_year;
    let mut ads = Vec::new();
    for (year, &short) in params.years().zip(&occ.statuses) {
        let s = if short { 1.0 } else { 0.0 };
        let n = rng.gen_range(lo..=hi);
        for k in 0..n {
            let salary_sd = 10_000.0;
            let salary = 70_000.0 + salary_sd * (occ.offsets[0] + params.salary_effect * s + normal(&mut rng));
            let salary_avg = salary + 0.3 * salary_sd * normal(&mut rng);
            let education = 14.0 + 1.5 * (occ.offsets[1] - params.education_effect * s + normal(&mut rng));
            let experience = 4.0 + 2.0 * (occ.offsets[2] - params.experience_effect * s + normal(&mut rng));

            let mut skills = BTreeSet::new();
            if rng.gen_bool(params.head_skill_rate) {
                skills.insert(HEAD_SKILL.to_string());
            }
            for (name, p, _) in COMMON_SKILLS {
                if rng.gen_bool(p) {
                    skills.insert(name.to_string());
                }
            }
            for (name, p, _) in &occ.skills {
                if rng.gen_bool(*p) {
                    skills.insert(name.clone());
                }
            }
            if skills.is_empty() {
                skills.insert(FALLBACK_SKILL.to_string());
            }
            let miss = params.missing_rate;
            ads.push(JobAd {
                ad_id: format!("{}-{year}-{k:04}", occ.code),
                year,
                quarter: rng.gen_range(1..=4),
                occupation: occ.code.clone(),
                skills,
                salary_median: maybe(&mut rng, miss, salary.max(0.0).round()),
                salary_avg: maybe(&mut rng, miss, salary_avg.max(0.0).round()),
                education_years: maybe(&mut rng, miss, (education.max(0.0) * 10.0).round() / 10.0),
                experience_years: maybe(&mut rng, miss, (experience.max(0.0) * 10.0).round() / 10.0),
            });
        }
    }
    ads
}

fn supply_records(params: &SynthParams, occs: &[Occupation]) -> Vec<LaborSupplyRecord> {
    // share of member occupations in shortage, per code and year
    let mut members: BTreeMap<OccupationCode, Vec<&Occupation>> = BTreeMap::new();
    for o in occs {
        for level in [CodeLevel::Major, CodeLevel::SubMajor, CodeLevel::Unit] {
            members.entry(o.code.ancestor(level).expect("six-digit code")).or_default().push(o);
        }
    }
    let mut out = Vec::new();
    for (code, group) in &members {
        let level = code.level();
        let mut rng = seed::rng(seed::derive(params.seed, &format!("synth/supply/{code}")));
        for metric in SupplyMetric::ALL.into_iter().filter(|m| m.level() == level) {
            let (base, sd) = supply_scale(metric);
            let offset = params.heterogeneity * normal(&mut rng);
            for (y, year) in params.years().enumerate() {
                let share = group.iter().filter(|o| o.statuses[y]).count() as f64 / group.len() as f64;
                let shift = if metric.is_hours_worked() {
                    params.hours_effect * share
                } else {
                    0.0
                };
                for quarter in 1..=4u8 {
                    let mut value = base + sd * (offset + shift + normal(&mut rng));
                    value = if metric.is_ratio() {
                        value.clamp(0.0, 1.0)
                    } else {
                        value.max(0.0)
                    };
                    // 4 significant decimals keeps files compact and exact on re-read
                    value = (value * 1e4).round() / 1e4;
                    out.push(LaborSupplyRecord {
                        occupation: code.clone(),
                        year,
                        quarter,
                        metric,
                        value,
                    });
                }
            }
        }
    }
    out
}

fn taxonomy_of(occs: &[Occupation]) -> SkillTaxonomy {
    let mut t = SkillTaxonomy::new();
    t.insert(HEAD_SKILL, SkillCategory::Baseline);
    t.insert(FALLBACK_SKILL, SkillCategory::Baseline);
    for (name, _, cat) in COMMON_SKILLS {
        t.insert(name, cat);
    }
    for o in occs {
        for (name, _, cat) in &o.skills {
            t.insert(name, *cat);
        }
    }
    t
}

pub fn generate(params: &SynthParams) -> Result<SynthDataset, SynthError> {
    params.validate()?;
    let occs = occupations(params);
    let labels = labels_of(params, &occs);
    let mut job_ads: Vec<JobAd> = occs.iter().flat_map(|o| ads_for(params, o)).collect();
    job_ads.sort_by(|a, b| (&a.occupation, a.year, &a.ad_id).cmp(&(&b.occupation, b.year, &b.ad_id)));
    let labor_supply = supply_records(params, &occs);
    let taxonomy = taxonomy_of(&occs);

    let profile = profile_dataset(&labels)?;
    let manifest = SynthManifest {
        params: params.clone(),
        counts: SynthCounts {
            occupations: occs.len(),
            job_ads: job_ads.len(),
            labor_supply_records: labor_supply.len(),
            labels: labels.len(),
            in_shortage: profile.in_shortage,
            not_in_shortage: profile.not_in_shortage,
            taxonomy_skills: taxonomy.len(),
        },
        flips_by_year: profile.flips_by_year.iter().map(|f| (f.year, f.flips)).collect(),
        total_flips: profile.total_flips(),
        files: [JOB_ADS_FILE, TAXONOMY_FILE, SUPPLY_FILE, LABELS_FILE]
            .map(String::from)
            .to_vec(),
    };
    Ok(SynthDataset {
        job_ads,
        taxonomy,
        labor_supply,
        labels,
        manifest,
    })
}

/// Writes the four corpus files and `synth_manifest.json` into `dir`.
pub fn write_dataset(dir: &Path, data: &SynthDataset) -> Result<(), SynthError> {
    fs::create_dir_all(dir)?;
    write_job_ads(&dir.join(JOB_ADS_FILE), &data.job_ads)?;
    write_skill_taxonomy(&dir.join(TAXONOMY_FILE), &data.taxonomy)?;
    write_labor_supply(&dir.join(SUPPLY_FILE), &data.labor_supply)?;
    write_shortage_labels(&dir.join(LABELS_FILE), &data.labels)?;
    fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&data.manifest)? + "\n",
    )?;
    Ok(())
}

/// First seed in `start..end` whose labels hold exactly `in_shortage`
/// shortage rows and at most `max_flips` status changes in every year.
pub fn find_calibrated_seed(
    params: &SynthParams,
    in_shortage: usize,
    max_flips: usize,
    start: u64,
    end: u64,
) -> Result<u64, SynthError> {
    for s in start..end {
        let labels = generate_labels(&SynthParams {
            seed: s,
            ..params.clone()
        })?;
        let p = profile_dataset(&labels)?;
        if p.in_shortage == in_shortage && p.flips_by_year.iter().all(|f| f.flips <= max_flips) {
            return Ok(s);
        }
    }
    Err(SynthError::NoCalibratedSeed { start, end })
}
