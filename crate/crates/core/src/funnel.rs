//! Detection-risk analytics over the criminal-justice pipeline.
//!
//! Each crime category is followed through four stages per year: crimes
//! registered by the police, pre-trial cases submitted to court, convicted
//! persons, and persons effectively imprisoned. The detention risk `p` is
//! read off the late stages with a threshold rubric: effective imprisonment
//! weighs most, conviction without imprisonment less, and inactivity gives 0.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The 2000-2013 Bulgarian dataset, 6 categories x 14 years. Category rows
/// and interpolated years are marked synthetic.
pub const BUNDLED_CSV: &str = include_str!("../data/bg_funnel_2000_2013.csv");
pub const BUNDLED_NAME: &str = "bg_funnel_2000_2013.csv";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunnelError {
    #[error("no records for category {0}")]
    EmptyCategory(CrimeCategory),
    #[error("category {0} has no registered crimes")]
    NothingRegistered(CrimeCategory),
    #[error("invalid funnel record: {0}")]
    InvalidRecord(String),
    #[error("invalid rubric: {0}")]
    InvalidRubric(String),
    #[error("{name} must be > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("unknown crime category {0:?}")]
    UnknownCategory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CrimeCategory {
    /// Search and discovery of treasure of cultural value.
    #[serde(rename = "art208")]
    Art208TreasureSearch,
    /// Classical treasure hunting.
    #[serde(rename = "art277a")]
    Art277aTreasureHunting,
    /// Concealment of cultural values.
    #[serde(rename = "art278")]
    Art278Concealment,
    /// Illegal export and illegal sale or acquisition.
    #[serde(rename = "art278a")]
    Art278aExportTrade,
    /// Damage and destruction of cultural values.
    #[serde(rename = "art278b")]
    Art278bDamageDestruction,
    #[serde(rename = "total")]
    Total,
}

impl CrimeCategory {
    pub const ALL: [CrimeCategory; 6] = [
        CrimeCategory::Total,
        CrimeCategory::Art208TreasureSearch,
        CrimeCategory::Art277aTreasureHunting,
        CrimeCategory::Art278Concealment,
        CrimeCategory::Art278aExportTrade,
        CrimeCategory::Art278bDamageDestruction,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            CrimeCategory::Art208TreasureSearch => "art208",
            CrimeCategory::Art277aTreasureHunting => "art277a",
            CrimeCategory::Art278Concealment => "art278",
            CrimeCategory::Art278aExportTrade => "art278a",
            CrimeCategory::Art278bDamageDestruction => "art278b",
            CrimeCategory::Total => "total",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CrimeCategory::Art208TreasureSearch => "search and discovery of treasure",
            CrimeCategory::Art277aTreasureHunting => "treasure hunting",
            CrimeCategory::Art278Concealment => "concealment of cultural values",
            CrimeCategory::Art278aExportTrade => "illegal export and trade",
            CrimeCategory::Art278bDamageDestruction => "damage and destruction",
            CrimeCategory::Total => "all heritage crimes",
        }
    }
}

impl fmt::Display for CrimeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for CrimeCategory {
    type Err = FunnelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.trim().to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        let key = key.strip_prefix("art").unwrap_or(&key);
        Ok(match key {
            "208" => CrimeCategory::Art208TreasureSearch,
            "277a" => CrimeCategory::Art277aTreasureHunting,
            "278" => CrimeCategory::Art278Concealment,
            "278a" => CrimeCategory::Art278aExportTrade,
            "278b" => CrimeCategory::Art278bDamageDestruction,
            "total" => CrimeCategory::Total,
            _ => return Err(FunnelError::UnknownCategory(s.to_string())),
        })
    }
}

/// One category-year of pipeline counts.
///
/// Convicted persons may exceed cases submitted to court, since one case
/// can convict several people.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelRecord {
    pub category: CrimeCategory,
    pub year: u16,
    pub registered: u32,
    pub submitted_to_court: u32,
    pub convicted_persons: u32,
    pub imprisoned_effective: u32,
    pub synthetic: bool,
}

impl FunnelRecord {
    pub fn validate(&self) -> Result<(), FunnelError> {
        if self.submitted_to_court > self.registered {
            return Err(FunnelError::InvalidRecord(format!(
                "{} {}: submitted_to_court ({}) exceeds registered ({})",
                self.category, self.year, self.submitted_to_court, self.registered
            )));
        }
        if self.imprisoned_effective > self.convicted_persons {
            return Err(FunnelError::InvalidRecord(format!(
                "{} {}: imprisoned_effective ({}) exceeds convicted_persons ({})",
                self.category, self.year, self.imprisoned_effective, self.convicted_persons
            )));
        }
        Ok(())
    }
}

/// Threshold rule mapping late-stage activity to a detention probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRubric {
    pub p_if_imprisonment: f64,
    pub p_if_conviction_only: f64,
    pub p_if_inactive: f64,
    /// Mean effective imprisonments per year needed for `p_if_imprisonment`.
    pub imprisonment_threshold: f64,
    /// Mean convicted persons per year needed for `p_if_conviction_only`.
    pub conviction_threshold: f64,
}

impl Default for DetectionRubric {
    fn default() -> Self {
        DetectionRubric {
            p_if_imprisonment: 0.01,
            p_if_conviction_only: 0.001,
            p_if_inactive: 0.0,
            imprisonment_threshold: 1.0,
            conviction_threshold: 1.0,
        }
    }
}

impl DetectionRubric {
    pub fn new(
        p_if_imprisonment: f64,
        p_if_conviction_only: f64,
        p_if_inactive: f64,
        imprisonment_threshold: f64,
        conviction_threshold: f64,
    ) -> Result<Self, FunnelError> {
        let r = DetectionRubric {
            p_if_imprisonment,
            p_if_conviction_only,
            p_if_inactive,
            imprisonment_threshold,
            conviction_threshold,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), FunnelError> {
        let ps = [self.p_if_inactive, self.p_if_conviction_only, self.p_if_imprisonment];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(FunnelError::InvalidRubric(format!("probabilities must lie in [0, 1]: {ps:?}")));
        }
        if !(ps[0] <= ps[1] && ps[1] <= ps[2]) {
            return Err(FunnelError::InvalidRubric(format!(
                "need p_if_inactive ({}) <= p_if_conviction_only ({}) <= p_if_imprisonment ({})",
                ps[0], ps[1], ps[2]
            )));
        }
        for (name, t) in [("imprisonment", self.imprisonment_threshold), ("conviction", self.conviction_threshold)] {
            if !(t.is_finite() && t > 0.0) {
                return Err(FunnelError::InvalidRubric(format!("{name} threshold must be > 0, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRates {
    pub submission_rate: f64,
    pub registered_per_year: f64,
    pub convictions_per_year: f64,
    pub imprisonments_per_year: f64,
    pub years: usize,
}

fn category_rows(records: &[FunnelRecord], category: CrimeCategory) -> Result<Vec<&FunnelRecord>, FunnelError> {
    let rows: Vec<_> = records.iter().filter(|r| r.category == category).collect();
    if rows.is_empty() {
        return Err(FunnelError::EmptyCategory(category));
    }
    Ok(rows)
}

fn per_year_mean(rows: &[&FunnelRecord], stage: impl Fn(&FunnelRecord) -> u32) -> f64 {
    rows.iter().map(|r| f64::from(stage(r))).sum::<f64>() / rows.len() as f64
}

/// Share of registered crimes reaching court, pooled over years, and per-year
/// means of the later stages.
pub fn stage_rates(records: &[FunnelRecord], category: CrimeCategory) -> Result<StageRates, FunnelError> {
    let rows = category_rows(records, category)?;
    let registered: u64 = rows.iter().map(|r| u64::from(r.registered)).sum();
    if registered == 0 {
        return Err(FunnelError::NothingRegistered(category));
    }
    let submitted: u64 = rows.iter().map(|r| u64::from(r.submitted_to_court)).sum();
    Ok(StageRates {
        submission_rate: submitted as f64 / registered as f64,
        registered_per_year: per_year_mean(&rows, |r| r.registered),
        convictions_per_year: per_year_mean(&rows, |r| r.convicted_persons),
        imprisonments_per_year: per_year_mean(&rows, |r| r.imprisoned_effective),
        years: rows.len(),
    })
}

fn rubric_p(rubric: &DetectionRubric, convictions: f64, imprisonments: f64) -> f64 {
    if imprisonments >= rubric.imprisonment_threshold {
        rubric.p_if_imprisonment
    } else if convictions >= rubric.conviction_threshold {
        rubric.p_if_conviction_only
    } else {
        rubric.p_if_inactive
    }
}

pub fn detection_risk(
    records: &[FunnelRecord],
    category: CrimeCategory,
    rubric: &DetectionRubric,
) -> Result<f64, FunnelError> {
    rubric.validate()?;
    let rows = category_rows(records, category)?;
    Ok(rubric_p(
        rubric,
        per_year_mean(&rows, |r| r.convicted_persons),
        per_year_mean(&rows, |r| r.imprisoned_effective),
    ))
}

/// Share of actually committed crimes that get registered.
pub fn registration_coverage(registered_per_year: f64, active_offenders: f64, lambda: f64) -> Result<f64, FunnelError> {
    if !(active_offenders > 0.0) {
        return Err(FunnelError::NonPositive { name: "active_offenders", value: active_offenders });
    }
    if !(lambda > 0.0) {
        return Err(FunnelError::NonPositive { name: "lambda", value: lambda });
    }
    if !(registered_per_year >= 0.0) {
        return Err(FunnelError::InvalidRecord(format!("registered per year must be >= 0, got {registered_per_year}")));
    }
    Ok(registered_per_year / (active_offenders * lambda))
}

/// Grid searched by [`calibrate_rubric`].
pub const CALIBRATION_P_LEVELS: [f64; 4] = [0.0, 0.001, 0.01, 0.05];
pub const CALIBRATION_THRESHOLDS: [f64; 3] = [1.0, 2.0, 5.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub category: CrimeCategory,
    pub target: f64,
    /// `None` when the category has no records.
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub rubric: DetectionRubric,
    pub mismatches: Vec<Mismatch>,
    pub candidates_evaluated: usize,
}

fn distance_from_default(r: &DetectionRubric) -> usize {
    let d = DetectionRubric::default();
    [
        r.p_if_imprisonment != d.p_if_imprisonment,
        r.p_if_conviction_only != d.p_if_conviction_only,
        r.p_if_inactive != d.p_if_inactive,
        r.imprisonment_threshold != d.imprisonment_threshold,
        r.conviction_threshold != d.conviction_threshold,
    ]
    .iter()
    .filter(|x| **x)
    .count()
}

/// Exhaustive search over ordered p levels and thresholds for the rubric
/// reproducing the most target probabilities. Ties go to the rubric closest
/// to the default, then to grid order. Imperfect fits are returned with
/// their mismatches listed.
pub fn calibrate_rubric(records: &[FunnelRecord], targets: &BTreeMap<CrimeCategory, f64>) -> Calibration {
    let stats: BTreeMap<CrimeCategory, Option<(f64, f64)>> = targets
        .keys()
        .map(|&c| {
            let s = category_rows(records, c).ok().map(|rows| {
                (per_year_mean(&rows, |r| r.convicted_persons), per_year_mean(&rows, |r| r.imprisoned_effective))
            });
            (c, s)
        })
        .collect();

    let mismatches_for = |rubric: &DetectionRubric| -> Vec<Mismatch> {
        targets
            .iter()
            .filter_map(|(&category, &target)| {
                let predicted = stats[&category].map(|(c, i)| rubric_p(rubric, c, i));
                (predicted != Some(target)).then_some(Mismatch { category, target, predicted })
            })
            .collect()
    };

    let default = DetectionRubric::default();
    let mut best = (mismatches_for(&default), 0usize, default);
    let mut evaluated = 1;
    for &inactive in &CALIBRATION_P_LEVELS {
        for &conviction in CALIBRATION_P_LEVELS.iter().filter(|&&p| p >= inactive) {
            for &imprisonment in CALIBRATION_P_LEVELS.iter().filter(|&&p| p >= conviction) {
                for &it in &CALIBRATION_THRESHOLDS {
                    for &ct in &CALIBRATION_THRESHOLDS {
                        let rubric = DetectionRubric {
                            p_if_imprisonment: imprisonment,
                            p_if_conviction_only: conviction,
                            p_if_inactive: inactive,
                            imprisonment_threshold: it,
                            conviction_threshold: ct,
                        };
                        evaluated += 1;
                        let m = mismatches_for(&rubric);
                        let dist = distance_from_default(&rubric);
                        if (m.len(), dist) < (best.0.len(), best.1) {
                            best = (m, dist, rubric);
                        }
                    }
                }
            }
        }
    }
    Calibration { rubric: best.2, mismatches: best.0, candidates_evaluated: evaluated }
}

/// The detention probabilities stated for each category of the bundled
/// dataset.
pub fn published_targets() -> BTreeMap<CrimeCategory, f64> {
    BTreeMap::from([
        (CrimeCategory::Total, 0.01),
        (CrimeCategory::Art208TreasureSearch, 0.001),
        (CrimeCategory::Art277aTreasureHunting, 0.01),
        (CrimeCategory::Art278Concealment, 0.01),
        (CrimeCategory::Art278aExportTrade, 0.001),
        (CrimeCategory::Art278bDamageDestruction, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(category: CrimeCategory, year: u16, counts: [u32; 4]) -> FunnelRecord {
        FunnelRecord {
            category,
            year,
            registered: counts[0],
            submitted_to_court: counts[1],
            convicted_persons: counts[2],
            imprisoned_effective: counts[3],
            synthetic: false,
        }
    }

    #[test]
    fn category_codes_round_trip() {
        for c in CrimeCategory::ALL {
            assert_eq!(c.code().parse::<CrimeCategory>().unwrap(), c);
        }
        assert_eq!("Art. 277a".parse::<CrimeCategory>().unwrap(), CrimeCategory::Art277aTreasureHunting);
        assert!("art999".parse::<CrimeCategory>().is_err());
    }

    #[test]
    fn record_invariants() {
        assert!(rec(CrimeCategory::Total, 2000, [10, 11, 0, 0]).validate().is_err());
        assert!(rec(CrimeCategory::Total, 2000, [10, 5, 1, 2]).validate().is_err());
        // more persons convicted than cases submitted is legitimate
        assert!(rec(CrimeCategory::Total, 2000, [10, 5, 9, 2]).validate().is_ok());
    }

    #[test]
    fn rubric_ordering_enforced() {
        assert!(DetectionRubric::new(0.001, 0.01, 0.0, 1.0, 1.0).is_err());
        assert!(DetectionRubric::new(0.01, 0.001, 0.0, 0.0, 1.0).is_err());
        assert!(DetectionRubric::default().validate().is_ok());
    }

    #[test]
    fn risk_levels() {
        let rubric = DetectionRubric::default();
        let recs = vec![
            rec(CrimeCategory::Total, 2000, [100, 60, 60, 1]),
            rec(CrimeCategory::Art208TreasureSearch, 2000, [10, 1, 1, 0]),
            rec(CrimeCategory::Art278bDamageDestruction, 2000, [0, 0, 0, 0]),
        ];
        assert_eq!(detection_risk(&recs, CrimeCategory::Total, &rubric).unwrap(), 0.01);
        assert_eq!(detection_risk(&recs, CrimeCategory::Art208TreasureSearch, &rubric).unwrap(), 0.001);
        assert_eq!(detection_risk(&recs, CrimeCategory::Art278bDamageDestruction, &rubric).unwrap(), 0.0);
        assert_eq!(
            detection_risk(&recs, CrimeCategory::Art278Concealment, &rubric).unwrap_err(),
            FunnelError::EmptyCategory(CrimeCategory::Art278Concealment)
        );
    }

    #[test]
    fn stage_rate_errors() {
        let recs = vec![rec(CrimeCategory::Art278bDamageDestruction, 2000, [0, 0, 0, 0])];
        assert!(matches!(
            stage_rates(&recs, CrimeCategory::Art278bDamageDestruction),
            Err(FunnelError::NothingRegistered(_))
        ));
        assert!(matches!(stage_rates(&recs, CrimeCategory::Total), Err(FunnelError::EmptyCategory(_))));
    }

    #[test]
    fn coverage_examples() {
        assert!((registration_coverage(368.0, 5000.0, 10.0).unwrap() - 0.00736).abs() < 1e-15);
        assert_eq!(registration_coverage(0.0, 5000.0, 10.0).unwrap(), 0.0);
        assert_eq!(registration_coverage(100.0, 100.0, 1.0).unwrap(), 1.0);
        assert!(registration_coverage(1.0, 0.0, 1.0).is_err());
        assert!(registration_coverage(1.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn single_target_keeps_default() {
        let recs = vec![rec(CrimeCategory::Total, 2000, [100, 60, 60, 1])];
        let targets = BTreeMap::from([(CrimeCategory::Total, 0.01)]);
        let cal = calibrate_rubric(&recs, &targets);
        assert_eq!(cal.rubric, DetectionRubric::default());
        assert!(cal.mismatches.is_empty());
    }

    #[test]
    fn contradictory_targets_surface_mismatch() {
        let recs = vec![
            rec(CrimeCategory::Art278Concealment, 2000, [100, 60, 10, 1]),
            rec(CrimeCategory::Art278aExportTrade, 2000, [100, 60, 10, 1]),
        ];
        let targets =
            BTreeMap::from([(CrimeCategory::Art278Concealment, 0.01), (CrimeCategory::Art278aExportTrade, 0.05)]);
        let cal = calibrate_rubric(&recs, &targets);
        assert_eq!(cal.mismatches.len(), 1);
    }

    #[test]
    fn missing_category_counts_as_mismatch() {
        let targets = BTreeMap::from([(CrimeCategory::Total, 0.01)]);
        let cal = calibrate_rubric(&[], &targets);
        assert_eq!(cal.mismatches, vec![Mismatch { category: CrimeCategory::Total, target: 0.01, predicted: None }]);
    }

    proptest! {
        #[test]
        fn more_imprisonment_never_lowers_risk(
            reg in 0u32..500, sub_frac in 0f64..=1.0, conv in 0u32..100, imp_frac in 0f64..=1.0, extra in 0u32..10,
        ) {
            let sub = (reg as f64 * sub_frac) as u32;
            let imp = (conv as f64 * imp_frac) as u32;
            let base = rec(CrimeCategory::Total, 2000, [reg, sub, conv, imp]);
            let more = rec(CrimeCategory::Total, 2000, [reg, sub, conv + extra, imp + extra]);
            let rubric = DetectionRubric::default();
            let p0 = detection_risk(&[base], CrimeCategory::Total, &rubric).unwrap();
            let p1 = detection_risk(&[more], CrimeCategory::Total, &rubric).unwrap();
            prop_assert!(p1 >= p0);
            if reg > 0 {
                let r = stage_rates(&[base], CrimeCategory::Total).unwrap();
                prop_assert!((0.0..=1.0).contains(&r.submission_rate));
            }
        }
    }
}
