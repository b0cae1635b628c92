//! Domain data model and file ingestion for job ads, labour supply
//! statistics and shortage labels.

mod io;
mod profile;

pub use io::{
    parse_job_ads, parse_job_ads_with, parse_labor_supply, parse_shortage_labels,
    parse_skill_taxonomy, write_job_ads, write_labor_supply, write_rejections,
    write_shortage_labels, write_skill_taxonomy, IngestOptions, Parsed, Rejection,
};
pub use profile::{major_group_name, profile_dataset, ProfileReport};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: unexpected header {found:?}, expected {expected:?}")]
    Header {
        path: String,
        found: Vec<String>,
        expected: Vec<&'static str>,
    },
    #[error("{path}:{line}: {reason}")]
    Fatal {
        path: String,
        line: u64,
        reason: String,
    },
    #[error("invalid occupation code {0:?}")]
    InvalidCode(String),
    #[error("empty label set")]
    EmptyLabels,
}

/// Level of an ANZSCO code, derived from its digit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CodeLevel {
    Major,
    SubMajor,
    Minor,
    Unit,
    Occupation,
}

impl CodeLevel {
    pub fn digits(self) -> usize {
        match self {
            CodeLevel::Major => 1,
            CodeLevel::SubMajor => 2,
            CodeLevel::Minor => 3,
            CodeLevel::Unit => 4,
            CodeLevel::Occupation => 6,
        }
    }

    fn from_digits(n: usize) -> Option<Self> {
        Some(match n {
            1 => CodeLevel::Major,
            2 => CodeLevel::SubMajor,
            3 => CodeLevel::Minor,
            4 => CodeLevel::Unit,
            6 => CodeLevel::Occupation,
            _ => return None,
        })
    }
}

/// A numeric ANZSCO code. Prefixes of a code name its ancestors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OccupationCode(String);

impl OccupationCode {
    pub fn new(code: &str) -> Result<Self, CorpusError> {
        code.parse()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn level(&self) -> CodeLevel {
        CodeLevel::from_digits(self.0.len()).expect("validated on construction")
    }

    /// The ancestor at `level`, or `None` if `level` is finer than this code.
    pub fn ancestor(&self, level: CodeLevel) -> Option<OccupationCode> {
        let n = level.digits();
        (n <= self.0.len()).then(|| OccupationCode(self.0[..n].to_string()))
    }

    /// Major group digit.
    pub fn major(&self) -> char {
        self.0.as_bytes()[0] as char
    }

    /// True when `self` equals `other` or lies underneath it in the hierarchy.
    pub fn is_within(&self, other: &OccupationCode) -> bool {
        self.0.starts_with(&other.0)
    }
}

impl FromStr for OccupationCode {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CorpusError::InvalidCode(s.to_string()));
        }
        CodeLevel::from_digits(s.len())
            .map(|_| OccupationCode(s.to_string()))
            .ok_or_else(|| CorpusError::InvalidCode(s.to_string()))
    }
}

impl TryFrom<String> for OccupationCode {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<OccupationCode> for String {
    fn from(c: OccupationCode) -> String {
        c.0
    }
}

impl fmt::Display for OccupationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Trim, collapse internal whitespace and lowercase a skill name.
pub fn normalize_skill(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobAd {
    pub ad_id: String,
    pub year: i32,
    pub quarter: u8,
    pub occupation: OccupationCode,
    /// Normalized, deduplicated and sorted.
    pub skills: BTreeSet<String>,
    pub salary_median: Option<f64>,
    pub salary_avg: Option<f64>,
    pub education_years: Option<f64>,
    pub experience_years: Option<f64>,
}

impl JobAd {
    pub fn has_skill(&self, skill: &str) -> bool {
        self.skills.contains(skill)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillCategory {
    Specialized,
    Baseline,
    Software,
    Uncategorized,
}

impl SkillCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            SkillCategory::Specialized => "specialized",
            SkillCategory::Baseline => "baseline",
            SkillCategory::Software => "software",
            SkillCategory::Uncategorized => "uncategorized",
        }
    }

    /// Parses one of the three taxonomy categories. `uncategorized` is a
    /// lookup result, not a valid file value.
    pub fn parse_file_value(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "specialized" | "specialised" => Some(SkillCategory::Specialized),
            "baseline" => Some(SkillCategory::Baseline),
            "software" => Some(SkillCategory::Software),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkillTaxonomy {
    categories: BTreeMap<String, SkillCategory>,
}

impl SkillTaxonomy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, skill: &str, category: SkillCategory) {
        assert!(category != SkillCategory::Uncategorized);
        self.categories.insert(normalize_skill(skill), category);
    }

    pub fn category(&self, skill: &str) -> SkillCategory {
        self.categories
            .get(skill)
            .copied()
            .unwrap_or(SkillCategory::Uncategorized)
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, SkillCategory)> {
        self.categories.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

macro_rules! supply_metrics {
    ($($variant:ident => $name:literal, $level:ident;)*) => {
        /// The fixed vocabulary of quarterly labour-force metrics.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum SupplyMetric { $($variant),* }

        impl SupplyMetric {
            pub const ALL: [SupplyMetric; 20] = [$(SupplyMetric::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(SupplyMetric::$variant => $name),* }
            }

            /// Hierarchy level the metric is published at.
            pub fn level(self) -> CodeLevel {
                match self { $(SupplyMetric::$variant => CodeLevel::$level),* }
            }

            pub fn from_name(s: &str) -> Option<Self> {
                match s { $($name => Some(SupplyMetric::$variant),)* _ => None }
            }
        }
    };
}

supply_metrics! {
    UnitTotalEmployed => "unit_total_employed", Unit;
    UnitTotalHoursWorked => "unit_total_hours_worked", Unit;
    SubFtEmployed => "sub_ft_employed", SubMajor;
    SubPtEmployed => "sub_pt_employed", SubMajor;
    SubTotalEmployed => "sub_total_employed", SubMajor;
    SubFtHoursWorked => "sub_ft_hours_worked", SubMajor;
    SubPtHoursWorked => "sub_pt_hours_worked", SubMajor;
    SubTotalHoursWorked => "sub_total_hours_worked", SubMajor;
    MajorFtEmployed => "major_ft_employed", Major;
    MajorPtEmployed => "major_pt_employed", Major;
    MajorTotalEmployed => "major_total_employed", Major;
    MajorFtHoursWorked => "major_ft_hours_worked", Major;
    MajorPtHoursWorked => "major_pt_hours_worked", Major;
    MajorTotalHoursWorked => "major_total_hours_worked", Major;
    MajorUnemployedFtSeekers => "major_unemployed_ft_seekers", Major;
    MajorUnemployedPtSeekers => "major_unemployed_pt_seekers", Major;
    MajorUnemployedTotalSeekers => "major_unemployed_total_seekers", Major;
    MajorTotalWeeksSearching => "major_total_weeks_searching", Major;
    MajorUnderemployedTotal => "major_underemployed_total", Major;
    MajorUnderemployedRatio => "major_underemployed_ratio", Major;
}

impl SupplyMetric {
    pub fn is_ratio(self) -> bool {
        self == SupplyMetric::MajorUnderemployedRatio
    }

    pub fn is_hours_worked(self) -> bool {
        self.name().contains("hours_worked")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaborSupplyRecord {
    pub occupation: OccupationCode,
    pub year: i32,
    pub quarter: u8,
    pub metric: SupplyMetric,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ShortageStatus {
    NotInShortage,
    InShortage,
}

impl ShortageStatus {
    pub fn token(self) -> &'static str {
        match self {
            ShortageStatus::InShortage => "in_shortage",
            ShortageStatus::NotInShortage => "not_in_shortage",
        }
    }

    pub fn parse_token(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in_shortage" => Some(ShortageStatus::InShortage),
            "not_in_shortage" => Some(ShortageStatus::NotInShortage),
            _ => None,
        }
    }

    pub fn is_shortage(self) -> bool {
        self == ShortageStatus::InShortage
    }

    pub fn from_bool(in_shortage: bool) -> Self {
        if in_shortage {
            ShortageStatus::InShortage
        } else {
            ShortageStatus::NotInShortage
        }
    }

    /// Numeric encoding used for lagged-target features.
    pub fn as_f64(self) -> f64 {
        if self.is_shortage() {
            1.0
        } else {
            0.0
        }
    }

    pub fn flipped(self) -> Self {
        Self::from_bool(!self.is_shortage())
    }
}

impl fmt::Display for ShortageStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortageLabel {
    pub occupation: OccupationCode,
    pub year: i32,
    pub status: ShortageStatus,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_levels_and_ancestors() {
        let c = OccupationCode::new("261311").unwrap();
        assert_eq!(c.level(), CodeLevel::Occupation);
        assert_eq!(c.ancestor(CodeLevel::Unit).unwrap().as_str(), "2613");
        assert_eq!(c.ancestor(CodeLevel::Major).unwrap().as_str(), "2");
        assert!(c.is_within(&OccupationCode::new("26").unwrap()));
        assert!(!c.is_within(&OccupationCode::new("27").unwrap()));
        assert_eq!(OccupationCode::new("26").unwrap().ancestor(CodeLevel::Unit), None);
    }

    #[test]
    fn code_rejects_bad_input() {
        for bad in ["", "12345", "1234567", "1234. 56", "12a4", " 1234"] {
            assert!(OccupationCode::new(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn skill_normalization() {
        assert_eq!(normalize_skill("  Project   Management "), "project management");
        assert_eq!(normalize_skill("SQL"), "sql");
    }

    #[test]
    fn metric_vocabulary_is_closed() {
        assert_eq!(SupplyMetric::ALL.len(), 20);
        for m in SupplyMetric::ALL {
            assert_eq!(SupplyMetric::from_name(m.name()), Some(m));
        }
        assert_eq!(SupplyMetric::from_name("bogus_metric"), None);
        let hours = SupplyMetric::ALL.iter().filter(|m| m.is_hours_worked()).count();
        assert_eq!(hours, 7);
    }

    #[test]
    fn taxonomy_lookup_falls_back() {
        let mut t = SkillTaxonomy::new();
        t.insert("Python", SkillCategory::Software);
        assert_eq!(t.category("python"), SkillCategory::Software);
        assert_eq!(t.category("welding"), SkillCategory::Uncategorized);
    }
}
