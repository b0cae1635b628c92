use std::collections::BTreeMap;

use crate::corpus::{JobAd, OccupationCode, SkillCategory, SkillTaxonomy};

/// The 12 demand features of one occupation-year, in `DEMAND_FEATURES` order.
pub type DemandFeatures = [Option<f64>; 12];

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn max_min(quarterly: &[Option<f64>; 4]) -> (Option<f64>, Option<f64>) {
    let present = quarterly.iter().flatten().copied();
    let max = present.clone().reduce(f64::max);
    let min = present.reduce(f64::min);
    (max, min)
}

#[derive(Default)]
struct QuarterBucket {
    salary_median: Vec<f64>,
    salary_avg: Vec<f64>,
    education: Vec<f64>,
    experience: Vec<f64>,
}

/// Aggregates the ads of one occupation-year. Quarterly medians of
/// `salary_median` and quarterly means of the other attributes feed the
/// max/min features; quarters without data are skipped.
fn aggregate(ads: &[&JobAd], taxonomy: &SkillTaxonomy) -> DemandFeatures {
    let mut quarters: [QuarterBucket; 4] = Default::default();
    let mut counts = [0u64; 3];
    for ad in ads {
        let q = &mut quarters[usize::from(ad.quarter.clamp(1, 4)) - 1];
        q.salary_median.extend(ad.salary_median);
        q.salary_avg.extend(ad.salary_avg);
        q.education.extend(ad.education_years);
        q.experience.extend(ad.experience_years);
        for s in &ad.skills {
            match taxonomy.category(s) {
                SkillCategory::Specialized => counts[0] += 1,
                SkillCategory::Baseline => counts[1] += 1,
                SkillCategory::Software => counts[2] += 1,
                SkillCategory::Uncategorized => {}
            }
        }
    }
    let mut per_quarter = |f: &dyn Fn(&mut QuarterBucket) -> Option<f64>| {
        let mut out = [None; 4];
        for (slot, q) in out.iter_mut().zip(quarters.iter_mut()) {
            *slot = f(q);
        }
        out
    };
    let (max_med, min_med) = max_min(&per_quarter(&|q| median(&mut q.salary_median)));
    let (max_avg, min_avg) = max_min(&per_quarter(&|q| mean(&q.salary_avg)));
    let (max_exp, min_exp) = max_min(&per_quarter(&|q| mean(&q.experience)));
    let (max_edu, min_edu) = max_min(&per_quarter(&|q| mean(&q.education)));
    [
        Some(ads.len() as f64),
        max_med,
        min_med,
        max_avg,
        min_avg,
        max_exp,
        min_exp,
        max_edu,
        min_edu,
        Some(counts[0] as f64),
        Some(counts[1] as f64),
        Some(counts[2] as f64),
    ]
}

/// Demand features keyed by each ad's own 6-digit occupation.
pub fn demand_features(
    ads: &[JobAd],
    taxonomy: &SkillTaxonomy,
) -> BTreeMap<(OccupationCode, i32), DemandFeatures> {
    let mut groups: BTreeMap<(OccupationCode, i32), Vec<&JobAd>> = BTreeMap::new();
    for ad in ads {
        groups
            .entry((ad.occupation.clone(), ad.year))
            .or_default()
            .push(ad);
    }
    groups
        .into_iter()
        .map(|(k, group)| (k, aggregate(&group, taxonomy)))
        .collect()
}

/// Demand features for each tracked occupation, pooling every ad coded at
/// or beneath it.
pub fn demand_features_for(
    ads: &[JobAd],
    taxonomy: &SkillTaxonomy,
    tracked: &[OccupationCode],
) -> BTreeMap<(OccupationCode, i32), DemandFeatures> {
    let mut groups: BTreeMap<(OccupationCode, i32), Vec<&JobAd>> = BTreeMap::new();
    for ad in ads {
        for occ in tracked.iter().filter(|o| ad.occupation.is_within(o)) {
            groups.entry((occ.clone(), ad.year)).or_default().push(ad);
        }
    }
    groups
        .into_iter()
        .map(|(k, group)| (k, aggregate(&group, taxonomy)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::DEMAND_FEATURES;

    fn ad(id: usize, quarter: u8, salary: Option<f64>, skills: &[&str]) -> JobAd {
        JobAd {
            ad_id: format!("a{id}"),
            year: 2015,
            quarter,
            occupation: OccupationCode::new("261311").unwrap(),
            skills: skills.iter().map(|s| s.to_string()).collect(),
            salary_median: salary,
            salary_avg: salary.map(|s| s + 1000.0),
            education_years: Some(15.0 + f64::from(quarter)),
            experience_years: None,
        }
    }

    fn taxonomy() -> SkillTaxonomy {
        let mut t = SkillTaxonomy::new();
        t.insert("communication", SkillCategory::Baseline);
        t.insert("teamwork", SkillCategory::Baseline);
        t.insert("python", SkillCategory::Software);
        t.insert("welding", SkillCategory::Specialized);
        t
    }

    fn feature(f: &DemandFeatures, name: &str) -> Option<f64> {
        f[DEMAND_FEATURES.iter().position(|n| *n == name).unwrap()]
    }

    #[test]
    fn posting_frequency_counts_ads() {
        let ads: Vec<_> = (0..7).map(|i| ad(i, 1, None, &["teamwork"])).collect();
        let out = demand_features(&ads, &taxonomy());
        let f = out.values().next().unwrap();
        assert_eq!(feature(f, "posting_frequency"), Some(7.0));
    }

    #[test]
    fn quarterly_max_min_skip_empty_quarters() {
        // quarterly medians {80k, 90k, none, 85k}
        let ads = vec![
            ad(0, 1, Some(80_000.0), &["python"]),
            ad(1, 2, Some(85_000.0), &["python"]),
            ad(2, 2, Some(95_000.0), &["python"]),
            ad(3, 3, None, &["python"]),
            ad(4, 4, Some(85_000.0), &["python"]),
        ];
        let f = demand_features(&ads, &taxonomy()).into_values().next().unwrap();
        assert_eq!(feature(&f, "max_median_salary"), Some(90_000.0));
        assert_eq!(feature(&f, "min_median_salary"), Some(80_000.0));
        assert_eq!(feature(&f, "max_average_salary"), Some(91_000.0));
        assert_eq!(feature(&f, "max_average_education"), Some(19.0));
        assert_eq!(feature(&f, "min_average_education"), Some(16.0));
        assert_eq!(feature(&f, "max_average_experience"), None);
    }

    #[test]
    fn category_counts_partition_mentions() {
        let ads = vec![
            ad(0, 1, None, &["communication", "teamwork"]),
            ad(1, 1, None, &["teamwork", "unknown skill"]),
        ];
        let f = demand_features(&ads, &taxonomy()).into_values().next().unwrap();
        assert_eq!(feature(&f, "baseline_count"), Some(3.0));
        assert_eq!(feature(&f, "specialized_count"), Some(0.0));
        assert_eq!(feature(&f, "software_count"), Some(0.0));
    }

    #[test]
    fn tracked_prefix_pools_descendants() {
        let mut ads: Vec<_> = (0..3).map(|i| ad(i, 1, None, &["python"])).collect();
        ads[2].occupation = OccupationCode::new("261312").unwrap();
        let unit = OccupationCode::new("2613").unwrap();
        let exact = OccupationCode::new("261311").unwrap();
        let out = demand_features_for(&ads, &taxonomy(), &[unit.clone(), exact.clone()]);
        assert_eq!(feature(&out[&(unit, 2015)], "posting_frequency"), Some(3.0));
        assert_eq!(feature(&out[&(exact, 2015)], "posting_frequency"), Some(2.0));
    }
}
