//! Skill importance per occupation-year: raw posting frequency and mean
//! Revealed Comparative Advantage.
//!
//! For a job ad `j` and skill `s`, with `x(j,s) = 1` when the ad lists the
//! skill,
//!
//! ```text
//! RCA(j,s) = (x(j,s) / sum_s' x(j,s')) / (sum_j' x(j',s) / sum_j',s' x(j',s'))
//! ```
//!
//! and the occupation-level weight `W(s,o)` is the mean of `RCA(j,s)` over
//! every ad of the occupation in the year, ads lacking the skill counting
//! as zero. The denominators are always taken over the full corpus.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{JobAd, OccupationCode};

#[derive(Debug, Error, PartialEq)]
pub enum SkillsError {
    #[error("empty job-ad corpus")]
    EmptyCorpus,
    #[error("job ad {0:?} has no skills")]
    EmptyAd(String),
    #[error("skill {0:?} does not occur in the corpus")]
    UnknownSkill(String),
    #[error("job ad {0:?} is not part of the indexed corpus")]
    UnknownAd(String),
    #[error("no job ads for occupation {0} in {1}")]
    NoAds(OccupationCode, i32),
    #[error("top-k must be at least 1")]
    ZeroK,
}

/// Precomputed sums over a job-ad corpus.
#[derive(Debug, Clone)]
pub struct SkillCorpusIndex<'a> {
    ads: &'a [JobAd],
    total_mentions: u64,
    per_skill: HashMap<&'a str, u64>,
    per_job: HashMap<&'a str, u64>,
}

impl<'a> SkillCorpusIndex<'a> {
    pub fn build(ads: &'a [JobAd]) -> Result<Self, SkillsError> {
        if ads.is_empty() {
            return Err(SkillsError::EmptyCorpus);
        }
        let mut per_skill: HashMap<&str, u64> = HashMap::new();
        let mut per_job = HashMap::with_capacity(ads.len());
        let mut total = 0;
        for ad in ads {
            if ad.skills.is_empty() {
                return Err(SkillsError::EmptyAd(ad.ad_id.clone()));
            }
            for s in &ad.skills {
                *per_skill.entry(s.as_str()).or_default() += 1;
            }
            per_job.insert(ad.ad_id.as_str(), ad.skills.len() as u64);
            total += ad.skills.len() as u64;
        }
        Ok(SkillCorpusIndex {
            ads,
            total_mentions: total,
            per_skill,
            per_job,
        })
    }

    pub fn ads(&self) -> &'a [JobAd] {
        self.ads
    }

    pub fn total_mentions(&self) -> u64 {
        self.total_mentions
    }

    pub fn skill_total(&self, skill: &str) -> Option<u64> {
        self.per_skill.get(skill).copied()
    }

    pub fn job_size(&self, ad_id: &str) -> Option<u64> {
        self.per_job.get(ad_id).copied()
    }

    /// Sorted view of the per-skill totals.
    pub fn skill_totals(&self) -> BTreeMap<&'a str, u64> {
        self.per_skill.iter().map(|(k, v)| (*k, *v)).collect()
    }

    pub fn distinct_skills(&self) -> usize {
        self.per_skill.len()
    }

    /// Ads of `occupation` (or any occupation underneath it) posted in `year`.
    pub fn jobs_for(&self, occupation: &OccupationCode, year: i32) -> Vec<&'a JobAd> {
        self.ads
            .iter()
            .filter(|ad| ad.year == year && ad.occupation.is_within(occupation))
            .collect()
    }

    /// (occupation, year) pairs present in the corpus, sorted.
    pub fn occupation_years(&self) -> Vec<(OccupationCode, i32)> {
        let mut keys: Vec<_> = self
            .ads
            .iter()
            .map(|ad| (ad.occupation.clone(), ad.year))
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }
}

/// RCA of `skill` in `job` against the indexed corpus.
pub fn rca(index: &SkillCorpusIndex<'_>, job: &JobAd, skill: &str) -> Result<f64, SkillsError> {
    let skill_total = index
        .skill_total(skill)
        .ok_or_else(|| SkillsError::UnknownSkill(skill.to_string()))?;
    let job_size = index
        .job_size(&job.ad_id)
        .ok_or_else(|| SkillsError::UnknownAd(job.ad_id.clone()))?;
    if !job.has_skill(skill) {
        return Ok(0.0);
    }
    // (1/|j|) / (n_s/N) = N / (|j| n_s); the integer product keeps small cases exact.
    Ok(index.total_mentions as f64 / (job_size * skill_total) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillImportanceRecord {
    pub skill: String,
    pub occupation: OccupationCode,
    pub year: i32,
    /// Ads of the occupation-year listing the skill.
    pub frequency: u64,
    pub mean_rca: f64,
}

/// `W(s,o)` and frequency for every skill appearing in the occupation-year,
/// sorted by skill name.
pub fn occupation_skill_weights(
    index: &SkillCorpusIndex<'_>,
    occupation: &OccupationCode,
    year: i32,
) -> Result<Vec<SkillImportanceRecord>, SkillsError> {
    let jobs = index.jobs_for(occupation, year);
    if jobs.is_empty() {
        return Err(SkillsError::NoAds(occupation.clone(), year));
    }
    let mut acc: BTreeMap<&str, (u64, f64)> = BTreeMap::new();
    for job in &jobs {
        for s in &job.skills {
            let r = rca(index, job, s)?;
            let e = acc.entry(s.as_str()).or_default();
            e.0 += 1;
            e.1 += r;
        }
    }
    let n = jobs.len() as f64;
    Ok(acc
        .into_iter()
        .map(|(skill, (frequency, sum))| SkillImportanceRecord {
            skill: skill.to_string(),
            occupation: occupation.clone(),
            year,
            frequency,
            mean_rca: sum / n,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    Frequency,
    Rca,
}

impl RankMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RankMode::Frequency => "frequency",
            RankMode::Rca => "rca",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSkill {
    pub rank: usize,
    pub record: SkillImportanceRecord,
}

pub const DEFAULT_MIN_YEARLY_COUNT: u64 = 5;

/// Ranks skills. RCA mode first drops skills seen in fewer than
/// `min_yearly_count` ads; frequency mode keeps everything. Ties go to the
/// lexicographically smaller skill.
pub fn top_skills(
    records: &[SkillImportanceRecord],
    mode: RankMode,
    k: usize,
    min_yearly_count: u64,
) -> Result<Vec<RankedSkill>, SkillsError> {
    if k == 0 {
        return Err(SkillsError::ZeroK);
    }
    let mut kept: Vec<&SkillImportanceRecord> = match mode {
        RankMode::Frequency => records.iter().collect(),
        RankMode::Rca => records
            .iter()
            .filter(|r| r.frequency >= min_yearly_count)
            .collect(),
    };
    match mode {
        RankMode::Frequency => {
            kept.sort_by(|a, b| b.frequency.cmp(&a.frequency).then(a.skill.cmp(&b.skill)))
        }
        RankMode::Rca => kept.sort_by(|a, b| {
            b.mean_rca
                .total_cmp(&a.mean_rca)
                .then(a.skill.cmp(&b.skill))
        }),
    }
    Ok(kept
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, r)| RankedSkill {
            rank: i + 1,
            record: r.clone(),
        })
        .collect())
}

/// Rankings for every occupation-year of the corpus.
pub fn rank_all(
    index: &SkillCorpusIndex<'_>,
    mode: RankMode,
    k: usize,
    min_yearly_count: u64,
) -> Result<Vec<RankedSkill>, SkillsError> {
    let mut out = Vec::new();
    for (occ, year) in index.occupation_years() {
        let records = occupation_skill_weights(index, &occ, year)?;
        out.extend(top_skills(&records, mode, k, min_yearly_count)?);
    }
    Ok(out)
}

/// Writes `skill_rankings.csv`.
pub fn write_rankings(path: &Path, ranked: &[RankedSkill], mode: RankMode) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record([
        "occupation_code",
        "year",
        "rank",
        "skill",
        "frequency",
        "mean_rca",
        "mode",
    ])?;
    for r in ranked {
        w.write_record([
            r.record.occupation.to_string(),
            r.record.year.to_string(),
            r.rank.to_string(),
            r.record.skill.clone(),
            r.record.frequency.to_string(),
            r.record.mean_rca.to_string(),
            mode.as_str().to_string(),
        ])?;
    }
    w.flush()
}
