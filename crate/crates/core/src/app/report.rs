//! Run reports: one JSON document plus plot-ready CSV tables.
//!
//! Reports carry no timestamps and no output paths, so identical config,
//! inputs and seed give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::econ::OffenderProfile;
use crate::funnel::{Calibration, CrimeCategory, DetectionRubric, StageRates};
use crate::market::{EnforcementResponseParams, Equilibrium};
use crate::microsim::SimResult;
use crate::scenario::{AlternativeDerivation, NetBenefitReport};
use crate::valuation::{Currency, TevBreakdown, Valued, WtpAggregate};

use super::AppError;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    /// SHA-256 of the effective config, one `key = value` line per key.
    pub config_sha256: String,
    /// SHA-256 of every input dataset, keyed by name.
    pub input_sha256: BTreeMap<String, String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryFunnel {
    pub category: CrimeCategory,
    pub label: String,
    #[serde(flatten)]
    pub rates: StageRates,
    pub detection_risk: f64,
    /// Registered crimes per year over crimes committed per year.
    pub coverage_mean: f64,
    /// Same, for the year with the most registrations.
    pub coverage_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunnelSection {
    pub dataset: String,
    pub records: usize,
    pub synthetic_records: usize,
    pub rubric: DetectionRubric,
    pub categories: Vec<CategoryFunnel>,
    pub status_quo_category: CrimeCategory,
    pub status_quo_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TevSection {
    pub currency: Currency,
    pub direct: Valued,
    pub additional: f64,
    /// `config` or `survey`.
    pub nonuse_source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survey: Option<WtpAggregate>,
    pub breakdown: TevBreakdown,
    pub tourism_baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupplyPoint {
    pub p: f64,
    pub net_expected_return: f64,
    pub cpp: f64,
    pub cpr: f64,
    pub budget: f64,
    pub tolerated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElasticityPoint {
    pub epsilon: f64,
    pub delta_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketSection {
    pub offender: OffenderProfile,
    pub status_quo_p: f64,
    pub status_quo_cpp: f64,
    pub tev_per_crime: f64,
    pub tev_at_risk: f64,
    pub response: EnforcementResponseParams,
    pub equilibrium: Equilibrium,
    pub delta_i: f64,
    pub delta_c: f64,
    pub supply_curve: Vec<SupplyPoint>,
    pub elasticity_sweep: Vec<ElasticityPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p: f64,
    #[serde(flatten)]
    pub result: SimResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSection {
    pub n_agents: u64,
    pub base_p: f64,
    pub base: SimResult,
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSection {
    pub status_quo_p: f64,
    pub tev_per_crime: f64,
    pub derivations: Vec<AlternativeDerivation>,
    pub evaluation: NetBenefitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrateSection {
    pub targets: BTreeMap<CrimeCategory, f64>,
    #[serde(flatten)]
    pub calibration: Calibration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub subcommand: String,
    pub provenance: Provenance,
    pub config: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub funnel: Option<FunnelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tev: Option<TevSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<CalibrateSection>,
}

/// A CSV table, kept as strings so the caller controls number formatting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut out = Vec::new();
        if let Some(f) = &self.funnel {
            out.push(Table {
                name: "funnel",
                header: vec![
                    "category",
                    "label",
                    "years",
                    "submission_rate",
                    "registered_per_year",
                    "convictions_per_year",
                    "imprisonments_per_year",
                    "detection_risk",
                    "coverage_mean",
                    "coverage_peak",
                ],
                rows: f
                    .categories
                    .iter()
                    .map(|c| {
                        vec![
                            c.category.code().to_string(),
                            c.label.clone(),
                            c.rates.years.to_string(),
                            num(c.rates.submission_rate),
                            num(c.rates.registered_per_year),
                            num(c.rates.convictions_per_year),
                            num(c.rates.imprisonments_per_year),
                            num(c.detection_risk),
                            num(c.coverage_mean),
                            num(c.coverage_peak),
                        ]
                    })
                    .collect(),
            });
        }
        if let Some(t) = &self.tev {
            let mut rows = vec![
                vec!["direct".to_string(), num(t.breakdown.direct)],
                vec!["additional".to_string(), num(t.breakdown.additional)],
            ];
            for c in &t.breakdown.indirect_components {
                rows.push(vec![c.kind().name().to_string(), num(c.amount())]);
                if let Some(sci) = c.scientific_subvalue() {
                    rows.push(vec!["educational.scientific".to_string(), num(sci)]);
                }
            }
            rows.push(vec!["indirect".to_string(), num(t.breakdown.indirect)]);
            rows.push(vec!["tev".to_string(), num(t.breakdown.tev)]);
            rows.push(vec!["tourism_baseline".to_string(), num(t.tourism_baseline)]);
            out.push(Table { name: "tev", header: vec!["component", "amount"], rows });
        }
        if let Some(m) = &self.market {
            out.push(Table {
                name: "supply_curve",
                header: vec!["p", "net_expected_return", "cpp", "cpr", "budget", "tolerated"],
                rows: m
                    .supply_curve
                    .iter()
                    .map(|s| [s.p, s.net_expected_return, s.cpp, s.cpr, s.budget, s.tolerated].map(num).to_vec())
                    .collect(),
            });
            out.push(Table {
                name: "elasticity_sweep",
                header: vec!["epsilon", "delta_i", "delta_c"],
                rows: m.elasticity_sweep.iter().map(|e| vec![num(e.epsilon), num(m.delta_i), num(e.delta_c)]).collect(),
            });
        }
        if let Some(s) = &self.simulate {
            out.push(Table {
                name: "enforcement_sweep",
                header: vec!["p", "cpr", "lambda_realized", "cpp", "n_committing", "total_crimes", "stderr_cpr"],
                rows: s
                    .sweep
                    .iter()
                    .map(|pt| {
                        let r = &pt.result;
                        vec![
                            num(pt.p),
                            num(r.cpr),
                            num(r.lambda_realized),
                            num(r.cpp),
                            r.n_committing.to_string(),
                            r.total_crimes.to_string(),
                            num(r.stderr_cpr),
                        ]
                    })
                    .collect(),
            });
        }
        if let Some(s) = &self.scenario {
            let ev = &s.evaluation;
            out.push(Table {
                name: "scenario",
                header: vec![
                    "alternative",
                    "name",
                    "budget",
                    "p",
                    "delta_i",
                    "crimes_averted",
                    "benefits",
                    "costs",
                    "net",
                    "rank",
                    "chosen",
                ],
                rows: s
                    .derivations
                    .iter()
                    .zip(&ev.alternatives)
                    .enumerate()
                    .map(|(i, (d, a))| {
                        let rank = ev.ranking.iter().position(|&r| r == i).map_or(0, |r| r + 1);
                        vec![
                            (i + 1).to_string(),
                            d.name.clone(),
                            num(d.budget),
                            num(d.p),
                            num(d.delta_i),
                            num(d.crimes_averted),
                            num(a.outcome.benefits),
                            num(a.outcome.costs),
                            num(a.outcome.net),
                            rank.to_string(),
                            u8::from(i == ev.chosen).to_string(),
                        ]
                    })
                    .collect(),
            });
        }
        if let Some(c) = &self.calibrate {
            let missed: Vec<CrimeCategory> = c.calibration.mismatches.iter().map(|m| m.category).collect();
            out.push(Table {
                name: "calibration",
                header: vec!["category", "target", "matched"],
                rows: c
                    .targets
                    .iter()
                    .map(|(cat, t)| vec![cat.code().to_string(), num(*t), u8::from(!missed.contains(cat)).to_string()])
                    .collect(),
            });
        }
        out
    }

    /// All tables concatenated, each preceded by a `# name` line.
    pub fn tables_text(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tables().iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let _ = writeln!(s, "# {}", t.name);
            s.push_str(&t.to_csv());
        }
        s
    }

    /// Writes `report.json` and one CSV per table into `dir`. Returns the
    /// paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, AppError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| AppError::Output { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        let json = dir.join("report.json");
        fs::write(&json, self.to_json()).map_err(io(&json))?;
        written.push(json);
        for t in self.tables() {
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv()).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}
