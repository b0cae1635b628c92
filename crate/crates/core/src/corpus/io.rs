use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use super::{
    normalize_skill, CorpusError, JobAd, LaborSupplyRecord, OccupationCode, ShortageLabel,
    ShortageStatus, SkillCategory, SkillTaxonomy, SupplyMetric,
};
use crate::corpus::CodeLevel;

const JOB_AD_HEADER: [&str; 9] = [
    "ad_id",
    "year",
    "quarter",
    "occupation_code",
    "salary_median",
    "salary_avg",
    "education_years",
    "experience_years",
    "skills",
];
const TAXONOMY_HEADER: [&str; 2] = ["skill", "category"];
const SUPPLY_HEADER: [&str; 5] = ["occupation_code", "year", "quarter", "metric", "value"];
const LABEL_HEADER: [&str; 3] = ["occupation_code", "year", "status"];

/// A data row that failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

/// Accepted records plus the rejection report for one file.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejections: Vec<Rejection>,
    /// Number of data rows (excluding the header) seen in the file.
    pub data_rows: usize,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub min_year: i32,
    pub max_year: i32,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            min_year: 1900,
            max_year: 2100,
        }
    }
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn open(path: &Path, expected: &[&'static str]) -> Result<csv::Reader<File>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path_str(path),
        source,
    })?;
    let mut reader = ReaderBuilder::new().flexible(true).from_reader(file);
    let header = reader.headers().map_err(|source| CorpusError::Csv {
        path: path_str(path),
        source,
    })?;
    let found: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    if found != expected {
        return Err(CorpusError::Header {
            path: path_str(path),
            found,
            expected: expected.to_vec(),
        });
    }
    Ok(reader)
}

/// Iterates data rows, yielding the 1-based line number with each record.
fn rows(
    reader: &mut csv::Reader<File>,
) -> impl Iterator<Item = (u64, Result<StringRecord, csv::Error>)> + '_ {
    let mut fallback_line = 1;
    reader.records().map(move |r| {
        fallback_line += 1;
        let line = match &r {
            Ok(rec) => rec.position().map(|p| p.line()).unwrap_or(fallback_line),
            Err(e) => e.position().map(|p| p.line()).unwrap_or(fallback_line),
        };
        fallback_line = line;
        (line, r)
    })
}

fn parse_year(s: &str, opts: &IngestOptions) -> Result<i32, String> {
    let year: i32 = s
        .trim()
        .parse()
        .map_err(|_| format!("invalid year {s:?}"))?;
    if year < opts.min_year || year > opts.max_year {
        return Err(format!(
            "year {year} outside window {}-{}",
            opts.min_year, opts.max_year
        ));
    }
    Ok(year)
}

fn parse_quarter(s: &str) -> Result<u8, String> {
    match s.trim().parse::<u8>() {
        Ok(q @ 1..=4) => Ok(q),
        _ => Err(format!("invalid quarter {s:?}")),
    }
}

fn parse_optional(s: &str, field: &str) -> Result<Option<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| format!("invalid {field} {s:?}"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("{field} must be a non-negative number, got {s:?}"));
    }
    Ok(Some(v))
}

pub fn parse_skill_taxonomy(path: &Path) -> Result<SkillTaxonomy, CorpusError> {
    let mut reader = open(path, &TAXONOMY_HEADER)?;
    let mut taxonomy = SkillTaxonomy::new();
    for (line, rec) in rows(&mut reader) {
        let fatal = |reason: String| CorpusError::Fatal {
            path: path_str(path),
            line,
            reason,
        };
        let rec = rec.map_err(|e| fatal(e.to_string()))?;
        if rec.len() != 2 {
            return Err(fatal(format!("expected 2 fields, found {}", rec.len())));
        }
        let skill = normalize_skill(&rec[0]);
        if skill.is_empty() {
            return Err(fatal("empty skill name".into()));
        }
        let category = SkillCategory::parse_file_value(&rec[1])
            .ok_or_else(|| fatal(format!("unknown skill category {:?}", &rec[1])))?;
        match taxonomy.category(&skill) {
            SkillCategory::Uncategorized => taxonomy.insert(&skill, category),
            existing if existing == category => {}
            existing => {
                return Err(fatal(format!(
                    "skill {skill:?} listed as both {} and {}",
                    existing.as_str(),
                    category.as_str()
                )))
            }
        }
    }
    Ok(taxonomy)
}

fn parse_job_ad_row(rec: &StringRecord, opts: &IngestOptions) -> Result<JobAd, String> {
    if rec.len() != JOB_AD_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            JOB_AD_HEADER.len(),
            rec.len()
        ));
    }
    let ad_id = rec[0].trim().to_string();
    if ad_id.is_empty() {
        return Err("empty ad_id".into());
    }
    let year = parse_year(&rec[1], opts)?;
    let quarter = parse_quarter(&rec[2])?;
    let occupation: OccupationCode = rec[3]
        .trim()
        .parse()
        .map_err(|_| format!("invalid occupation code {:?}", &rec[3]))?;
    if occupation.level() != CodeLevel::Occupation {
        return Err(format!("occupation code {occupation} is not 6-digit"));
    }
    let skills: BTreeSet<String> = rec[8]
        .split(';')
        .map(normalize_skill)
        .filter(|s| !s.is_empty())
        .collect();
    if skills.is_empty() {
        return Err("empty skill set".into());
    }
    Ok(JobAd {
        ad_id,
        year,
        quarter,
        occupation,
        skills,
        salary_median: parse_optional(&rec[4], "salary_median")?,
        salary_avg: parse_optional(&rec[5], "salary_avg")?,
        education_years: parse_optional(&rec[6], "education_years")?,
        experience_years: parse_optional(&rec[7], "experience_years")?,
    })
}

/// Parses `job_ads.csv` and `skill_taxonomy.csv` with the default year window.
pub fn parse_job_ads(
    path: &Path,
    taxonomy_path: &Path,
) -> Result<(Parsed<JobAd>, SkillTaxonomy), CorpusError> {
    parse_job_ads_with(path, taxonomy_path, &IngestOptions::default())
}

pub fn parse_job_ads_with(
    path: &Path,
    taxonomy_path: &Path,
    opts: &IngestOptions,
) -> Result<(Parsed<JobAd>, SkillTaxonomy), CorpusError> {
    let taxonomy = parse_skill_taxonomy(taxonomy_path)?;
    let mut reader = open(path, &JOB_AD_HEADER)?;
    let mut records = Vec::new();
    let mut rejections = Vec::new();
    let mut seen_ids = HashSet::new();
    let mut data_rows = 0;
    for (line, rec) in rows(&mut reader) {
        data_rows += 1;
        let parsed = rec
            .map_err(|e| e.to_string())
            .and_then(|r| parse_job_ad_row(&r, opts))
            .and_then(|ad| {
                if seen_ids.insert(ad.ad_id.clone()) {
                    Ok(ad)
                } else {
                    Err(format!("duplicate ad_id {:?}", ad.ad_id))
                }
            });
        match parsed {
            Ok(ad) => records.push(ad),
            Err(reason) => rejections.push(Rejection { line, reason }),
        }
    }
    records.sort_by(|a: &JobAd, b: &JobAd| {
        (&a.occupation, a.year, &a.ad_id).cmp(&(&b.occupation, b.year, &b.ad_id))
    });
    Ok((
        Parsed {
            records,
            rejections,
            data_rows,
        },
        taxonomy,
    ))
}

fn parse_supply_row(rec: &StringRecord) -> Result<LaborSupplyRecord, String> {
    if rec.len() != SUPPLY_HEADER.len() {
        return Err(format!("expected 5 fields, found {}", rec.len()));
    }
    let occupation: OccupationCode = rec[0]
        .trim()
        .parse()
        .map_err(|_| format!("invalid occupation code {:?}", &rec[0]))?;
    let year = parse_year(&rec[1], &IngestOptions::default())?;
    let quarter = parse_quarter(&rec[2])?;
    let metric = SupplyMetric::from_name(rec[3].trim())
        .ok_or_else(|| format!("unknown metric {:?}", &rec[3]))?;
    if occupation.level() != metric.level() {
        return Err(format!(
            "metric {} is published at {:?} level but code {occupation} is {:?}",
            metric.name(),
            metric.level(),
            occupation.level()
        ));
    }
    let value: f64 = rec[4]
        .trim()
        .parse()
        .map_err(|_| format!("invalid value {:?}", &rec[4]))?;
    if !value.is_finite() || value < 0.0 {
        return Err(format!("value must be a non-negative number, got {:?}", &rec[4]));
    }
    if metric.is_ratio() && value > 1.0 {
        return Err(format!("ratio metric {} outside [0,1]: {value}", metric.name()));
    }
    Ok(LaborSupplyRecord {
        occupation,
        year,
        quarter,
        metric,
        value,
    })
}

/// Parses `labor_supply.csv`. Invalid rows are rejected; a repeated
/// (occupation, year, quarter, metric) key is fatal.
pub fn parse_labor_supply(path: &Path) -> Result<Parsed<LaborSupplyRecord>, CorpusError> {
    let mut reader = open(path, &SUPPLY_HEADER)?;
    let mut records = Vec::new();
    let mut rejections = Vec::new();
    let mut keys = HashSet::new();
    let mut data_rows = 0;
    for (line, rec) in rows(&mut reader) {
        data_rows += 1;
        match rec.map_err(|e| e.to_string()).and_then(|r| parse_supply_row(&r)) {
            Ok(r) => {
                let key = (r.occupation.clone(), r.year, r.quarter, r.metric);
                if !keys.insert(key) {
                    return Err(CorpusError::Fatal {
                        path: path_str(path),
                        line,
                        reason: format!(
                            "duplicate record for {} {} Q{} {}",
                            r.occupation,
                            r.year,
                            r.quarter,
                            r.metric.name()
                        ),
                    });
                }
                records.push(r);
            }
            Err(reason) => rejections.push(Rejection { line, reason }),
        }
    }
    Ok(Parsed {
        records,
        rejections,
        data_rows,
    })
}

/// Parses `shortage_labels.csv`. Every defect is fatal.
pub fn parse_shortage_labels(path: &Path) -> Result<Vec<ShortageLabel>, CorpusError> {
    let mut reader = open(path, &LABEL_HEADER)?;
    let mut labels = Vec::new();
    let mut keys = HashSet::new();
    for (line, rec) in rows(&mut reader) {
        let fatal = |reason: String| CorpusError::Fatal {
            path: path_str(path),
            line,
            reason,
        };
        let rec = rec.map_err(|e| fatal(e.to_string()))?;
        if rec.len() != LABEL_HEADER.len() {
            return Err(fatal(format!("expected 3 fields, found {}", rec.len())));
        }
        let occupation: OccupationCode = rec[0]
            .trim()
            .parse()
            .map_err(|_| fatal(format!("invalid occupation code {:?}", &rec[0])))?;
        let year = parse_year(&rec[1], &IngestOptions::default()).map_err(fatal)?;
        let status = ShortageStatus::parse_token(&rec[2])
            .ok_or_else(|| fatal(format!("unknown status {:?}", &rec[2])))?;
        if !keys.insert((occupation.clone(), year)) {
            return Err(fatal(format!("duplicate label for {occupation} {year}")));
        }
        labels.push(ShortageLabel {
            occupation,
            year,
            status,
        });
    }
    labels.sort_by(|a, b| (&a.occupation, a.year).cmp(&(&b.occupation, b.year)));
    Ok(labels)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CorpusError> {
    let file = File::create(path).map_err(|source| CorpusError::Io {
        path: path_str(path),
        source,
    })?;
    Ok(WriterBuilder::new().from_writer(file))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CorpusError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let wrap = |source| CorpusError::Csv {
        path: path_str(path),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| CorpusError::Io {
        path: path_str(path),
        source,
    })
}

pub fn write_job_ads(path: &Path, ads: &[JobAd]) -> Result<(), CorpusError> {
    write_rows(
        path,
        &JOB_AD_HEADER,
        ads.iter().map(|ad| {
            [
                ad.ad_id.clone(),
                ad.year.to_string(),
                ad.quarter.to_string(),
                ad.occupation.to_string(),
                fmt_opt(ad.salary_median),
                fmt_opt(ad.salary_avg),
                fmt_opt(ad.education_years),
                fmt_opt(ad.experience_years),
                ad.skills.iter().cloned().collect::<Vec<_>>().join(";"),
            ]
        }),
    )
}

pub fn write_skill_taxonomy(path: &Path, taxonomy: &SkillTaxonomy) -> Result<(), CorpusError> {
    write_rows(
        path,
        &TAXONOMY_HEADER,
        taxonomy.iter().map(|(s, c)| [s.to_string(), c.as_str().to_string()]),
    )
}

pub fn write_labor_supply(path: &Path, records: &[LaborSupplyRecord]) -> Result<(), CorpusError> {
    write_rows(
        path,
        &SUPPLY_HEADER,
        records.iter().map(|r| {
            [
                r.occupation.to_string(),
                r.year.to_string(),
                r.quarter.to_string(),
                r.metric.name().to_string(),
                r.value.to_string(),
            ]
        }),
    )
}

pub fn write_shortage_labels(path: &Path, labels: &[ShortageLabel]) -> Result<(), CorpusError> {
    write_rows(
        path,
        &LABEL_HEADER,
        labels.iter().map(|l| {
            [
                l.occupation.to_string(),
                l.year.to_string(),
                l.status.token().to_string(),
            ]
        }),
    )
}

/// Writes a plain-text `line_number,reason` rejection report.
pub fn write_rejections(path: &Path, rejections: &[Rejection]) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path_str(path),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "line_number,reason").map_err(io_err)?;
    for r in rejections {
        writeln!(w, "{},{}", r.line, r.reason.replace(['\n', '\r'], " ")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
