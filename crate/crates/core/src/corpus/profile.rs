use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{CorpusError, OccupationCode, ShortageLabel, ShortageStatus};

/// ANZSCO major group titles.
pub fn major_group_name(major: char) -> &'static str {
    match major {
        '1' => "Managers",
        '2' => "Professionals",
        '3' => "Technicians and Trades Workers",
        '4' => "Community and Personal Service Workers",
        '5' => "Clerical and Administrative Workers",
        '6' => "Sales Workers",
        '7' => "Machinery Operators and Drivers",
        '8' => "Labourers",
        _ => "Unknown",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorGroupShare {
    pub major: String,
    pub name: String,
    pub occupations: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YearStatusCount {
    pub year: i32,
    pub in_shortage: usize,
    pub not_in_shortage: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YearFlips {
    pub year: i32,
    /// Occupations whose status at `year` differs from `year - 1`.
    pub flips: usize,
    pub to_shortage: usize,
    pub to_not_shortage: usize,
}

/// Dataset profile behind the label-distribution and status-change figures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub rows: usize,
    pub occupations: usize,
    pub in_shortage: usize,
    pub not_in_shortage: usize,
    /// Sorted by occupation count, descending.
    pub major_groups: Vec<MajorGroupShare>,
    pub status_by_year: Vec<YearStatusCount>,
    pub flips_by_year: Vec<YearFlips>,
    /// Length of maximal runs of consecutive in-shortage years -> count.
    pub shortage_spell_lengths: BTreeMap<usize, usize>,
}

impl ProfileReport {
    /// Share of occupations covered by the two largest major groups.
    pub fn top_two_share(&self) -> f64 {
        self.major_groups.iter().take(2).map(|g| g.share).sum()
    }

    pub fn total_flips(&self) -> usize {
        self.flips_by_year.iter().map(|f| f.flips).sum()
    }
}

pub fn profile_dataset(labels: &[ShortageLabel]) -> Result<ProfileReport, CorpusError> {
    if labels.is_empty() {
        return Err(CorpusError::EmptyLabels);
    }
    let mut series: BTreeMap<&OccupationCode, BTreeMap<i32, ShortageStatus>> = BTreeMap::new();
    for l in labels {
        series.entry(&l.occupation).or_default().insert(l.year, l.status);
    }

    let mut by_major: BTreeMap<char, usize> = BTreeMap::new();
    for occ in series.keys() {
        *by_major.entry(occ.major()).or_default() += 1;
    }
    let n_occ = series.len();
    let mut major_groups: Vec<MajorGroupShare> = by_major
        .into_iter()
        .map(|(m, n)| MajorGroupShare {
            major: m.to_string(),
            name: major_group_name(m).to_string(),
            occupations: n,
            share: n as f64 / n_occ as f64,
        })
        .collect();
    major_groups.sort_by(|a, b| b.occupations.cmp(&a.occupations).then(a.major.cmp(&b.major)));

    let years: BTreeSet<i32> = labels.iter().map(|l| l.year).collect();
    let status_by_year = years
        .iter()
        .map(|&year| {
            let (mut ins, mut outs) = (0, 0);
            for s in series.values().filter_map(|s| s.get(&year)) {
                if s.is_shortage() {
                    ins += 1;
                } else {
                    outs += 1;
                }
            }
            YearStatusCount {
                year,
                in_shortage: ins,
                not_in_shortage: outs,
            }
        })
        .collect();

    let flips_by_year = years
        .iter()
        .skip(1)
        .map(|&year| {
            let mut f = YearFlips {
                year,
                flips: 0,
                to_shortage: 0,
                to_not_shortage: 0,
            };
            for s in series.values() {
                if let (Some(prev), Some(cur)) = (s.get(&(year - 1)), s.get(&year)) {
                    if prev != cur {
                        f.flips += 1;
                        if cur.is_shortage() {
                            f.to_shortage += 1;
                        } else {
                            f.to_not_shortage += 1;
                        }
                    }
                }
            }
            f
        })
        .collect();

    let mut spells = BTreeMap::new();
    for s in series.values() {
        let mut run = 0usize;
        let mut prev_year: Option<i32> = None;
        for (&year, status) in s {
            if prev_year.is_some_and(|p| p + 1 != year) && run > 0 {
                *spells.entry(run).or_default() += 1;
                run = 0;
            }
            if status.is_shortage() {
                run += 1;
            } else if run > 0 {
                *spells.entry(run).or_default() += 1;
                run = 0;
            }
            prev_year = Some(year);
        }
        if run > 0 {
            *spells.entry(run).or_default() += 1;
        }
    }

    let in_shortage = labels.iter().filter(|l| l.status.is_shortage()).count();
    Ok(ProfileReport {
        rows: labels.len(),
        occupations: n_occ,
        in_shortage,
        not_in_shortage: labels.len() - in_shortage,
        major_groups,
        status_by_year,
        flips_by_year,
        shortage_spell_lengths: spells,
    })
}
