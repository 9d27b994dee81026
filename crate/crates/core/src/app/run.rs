//! Subcommand orchestration.
//!
//! All inputs are loaded and validated before any model runs, and nothing is
//! written unless the whole run succeeds.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::econ::net_expected_return;
use crate::funnel::{
    calibrate_rubric, detection_risk, registration_coverage, stage_rates, CrimeCategory, FunnelRecord, BUNDLED_CSV,
    BUNDLED_NAME,
};
use crate::market::{
    imprisonment_effect, solve_equilibrium, supply_cpp, supply_cpr, Elasticities, EnforcementResponseParams,
    MarketError,
};
use crate::microsim::{enforcement_sweep, simulate_population};
use crate::scenario::{build_alternatives_from_model, opportunity_cost, AlternativeLever, ScenarioInputs};
use crate::valuation::{
    additional_monetary_value, aggregate_wtp, direct_value, tev_total, tourism_baseline, NonUseComponent, NonUseKind,
    SurveyResponse,
};

use super::config::RunConfig;
use super::ingest::{parse_funnel_csv, parse_survey_csv, read_file};
use super::report::{
    sha256_hex, CalibrateSection, CategoryFunnel, ElasticityPoint, FunnelSection, MarketSection, Provenance, RunReport,
    ScenarioSection, SimulateSection, SupplyPoint, SweepPoint, TevSection, TOOL, VERSION,
};
use super::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subcommand {
    Funnel,
    Tev,
    Market,
    Simulate,
    Scenario,
    Calibrate,
    All,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Funnel,
        Subcommand::Tev,
        Subcommand::Market,
        Subcommand::Simulate,
        Subcommand::Scenario,
        Subcommand::Calibrate,
        Subcommand::All,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Funnel => "funnel",
            Subcommand::Tev => "tev",
            Subcommand::Market => "market",
            Subcommand::Simulate => "simulate",
            Subcommand::Scenario => "scenario",
            Subcommand::Calibrate => "calibrate",
            Subcommand::All => "all",
        }
    }

    fn includes(&self, part: Subcommand) -> bool {
        *self == Subcommand::All || *self == part
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subcommand::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown subcommand {s:?}"))
    }
}

/// Validated input datasets with their checksums.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub funnel_name: String,
    pub records: Vec<FunnelRecord>,
    pub survey: Option<Vec<SurveyResponse>>,
    pub checksums: BTreeMap<String, String>,
}

fn display_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs, AppError> {
    let mut checksums = BTreeMap::new();
    let (funnel_name, records) = match &cfg.funnel.csv {
        None => {
            checksums.insert(format!("funnel:{BUNDLED_NAME}"), sha256_hex(BUNDLED_CSV.as_bytes()));
            (BUNDLED_NAME.to_string(), parse_funnel_csv(BUNDLED_CSV, BUNDLED_NAME)?)
        }
        Some(path) => {
            let text = read_file(path)?;
            let name = display_name(path);
            checksums.insert(format!("funnel:{name}"), sha256_hex(text.as_bytes()));
            let recs = parse_funnel_csv(&text, &path.display().to_string())?;
            (name, recs)
        }
    };
    let survey = match &cfg.valuation.survey_csv {
        None => None,
        Some(path) => {
            let text = read_file(path)?;
            checksums.insert(format!("survey:{}", display_name(path)), sha256_hex(text.as_bytes()));
            Some(parse_survey_csv(&text, &path.display().to_string(), cfg.currency)?)
        }
    };
    Ok(Inputs { funnel_name, records, survey, checksums })
}

pub fn funnel_section(cfg: &RunConfig, inputs: &Inputs) -> Result<FunnelSection, AppError> {
    let f = &cfg.funnel;
    let records = &inputs.records;
    let mut categories = Vec::new();
    for cat in CrimeCategory::ALL {
        let rows: Vec<&FunnelRecord> = records.iter().filter(|r| r.category == cat).collect();
        if rows.is_empty() {
            continue;
        }
        let rates = stage_rates(records, cat)?;
        let peak = rows.iter().map(|r| r.registered).max().unwrap_or(0);
        categories.push(CategoryFunnel {
            category: cat,
            label: cat.label().to_string(),
            rates,
            detection_risk: detection_risk(records, cat, &f.rubric)?,
            coverage_mean: registration_coverage(rates.registered_per_year, f.active_offenders, f.lambda)?,
            coverage_peak: registration_coverage(f64::from(peak), f.active_offenders, f.lambda)?,
        });
    }
    Ok(FunnelSection {
        dataset: inputs.funnel_name.clone(),
        records: records.len(),
        synthetic_records: records.iter().filter(|r| r.synthetic).count(),
        rubric: f.rubric,
        categories,
        status_quo_category: f.status_quo_category,
        status_quo_p: detection_risk(records, f.status_quo_category, &f.rubric)?,
    })
}

pub fn tev_section(cfg: &RunConfig, inputs: &Inputs) -> Result<TevSection, AppError> {
    let v = &cfg.valuation;
    let direct = direct_value(&v.direct)?;
    let additional = additional_monetary_value(&v.before, &v.during);
    let (source, survey, amounts): (&str, _, Vec<(NonUseKind, f64)>) = match &inputs.survey {
        Some(responses) => {
            let agg = aggregate_wtp(responses, v.survey_population, v.trim_fraction)?;
            let amounts = agg.values.iter().map(|(k, a)| (*k, *a)).collect();
            ("survey", Some(agg), amounts)
        }
        None => ("config", None, v.nonuse.clone()),
    };
    let components = amounts
        .into_iter()
        .map(|(kind, amount)| match (kind, v.scientific) {
            (NonUseKind::Educational, Some(sci)) => NonUseComponent::educational_with_scientific(amount, sci),
            _ => NonUseComponent::new(kind, amount),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let breakdown = tev_total(direct.amount, additional, &components)?;
    Ok(TevSection {
        currency: cfg.currency,
        direct,
        additional,
        nonuse_source: source.to_string(),
        survey,
        breakdown,
        tourism_baseline: tourism_baseline(v.gdp, v.tourism_share, v.cultural_share)?,
    })
}

/// Quantities shared by the market and scenario stages.
struct Enforcement {
    status_quo_p: f64,
    tev_per_crime: f64,
    tev_at_risk: f64,
    response: EnforcementResponseParams,
}

fn enforcement(cfg: &RunConfig, funnel: &FunnelSection, tev: &TevSection) -> Result<Enforcement, AppError> {
    let m = &cfg.market;
    let tev_per_crime = cfg.scenario.tev_per_crime.unwrap_or(tev.breakdown.tev);
    let tev_at_risk = tev_per_crime * cfg.funnel.active_offenders * cfg.funnel.lambda;
    if !(tev_at_risk > 0.0) {
        return Err(MarketError::NonPositiveDamage(tev_at_risk).into());
    }
    let response = match m.efficiency {
        Some(e) => EnforcementResponseParams::new(m.p_floor, m.p_max, e)?,
        None => EnforcementResponseParams::calibrated(
            m.p_floor,
            m.p_max,
            m.baseline_budget,
            tev_at_risk,
            funnel.status_quo_p,
        )?,
    };
    Ok(Enforcement { status_quo_p: funnel.status_quo_p, tev_per_crime, tev_at_risk, response })
}

fn market_section(cfg: &RunConfig, enf: &Enforcement) -> Result<MarketSection, AppError> {
    let m = &cfg.market;
    let lambda = cfg.funnel.lambda;
    let offender = m.offender.with_p(enf.status_quo_p);
    let equilibrium = solve_equilibrium(&m.supply, &m.demand, &offender, &enf.response, enf.tev_at_risk)?;
    let supply_curve = (0..=m.p_steps)
        .map(|i| {
            let p = m.p_floor + (m.p_max - m.p_floor) * f64::from(i) / f64::from(m.p_steps);
            let prof = offender.with_p(p);
            let budget = enf.response.budget_for(p, enf.tev_at_risk);
            Ok(SupplyPoint {
                p,
                net_expected_return: net_expected_return(&prof),
                cpp: supply_cpp(&m.supply, &prof),
                cpr: supply_cpr(&m.supply, &prof, lambda)?,
                budget,
                tolerated: m.demand.tolerated(budget),
            })
        })
        .collect::<Result<Vec<_>, MarketError>>()?;
    let elasticity_sweep = m
        .epsilon_grid
        .iter()
        .map(|&eps| {
            let el = Elasticities::new(m.elasticities.eta(), eps)?;
            Ok(ElasticityPoint { epsilon: eps, delta_c: imprisonment_effect(&el, m.delta_i)? })
        })
        .collect::<Result<Vec<_>, MarketError>>()?;
    Ok(MarketSection {
        offender,
        status_quo_p: enf.status_quo_p,
        status_quo_cpp: supply_cpp(&m.supply, &offender),
        tev_per_crime: enf.tev_per_crime,
        tev_at_risk: enf.tev_at_risk,
        response: enf.response,
        equilibrium,
        delta_i: m.delta_i,
        delta_c: imprisonment_effect(&m.elasticities, m.delta_i)?,
        supply_curve,
        elasticity_sweep,
    })
}

fn simulate_section(cfg: &RunConfig) -> Result<SimulateSection, AppError> {
    let spec = cfg.population_spec();
    let base = simulate_population(&spec)?;
    let sweep = enforcement_sweep(&spec, &cfg.population.p_values)?
        .into_iter()
        .map(|(p, result)| SweepPoint { p, result })
        .collect();
    Ok(SimulateSection { n_agents: spec.n_agents, base_p: spec.p, base, sweep })
}

fn scenario_section(cfg: &RunConfig, enf: &Enforcement) -> Result<ScenarioSection, AppError> {
    let s = &cfg.scenario;
    let lever = |i: usize| AlternativeLever {
        name: s.names[i + 1].clone(),
        extra_budget: s.extra_budget[i],
        redirect_share: s.redirect_share[i],
    };
    let inputs = ScenarioInputs {
        status_quo_p: enf.status_quo_p,
        baseline_budget: cfg.market.baseline_budget,
        tev_at_risk: enf.tev_at_risk,
        tev_per_crime: enf.tev_per_crime,
        response: enf.response,
        elasticities: cfg.market.elasticities,
        active_offenders: cfg.funnel.active_offenders,
        lambda: cfg.funnel.lambda,
        tourism_uplift_per_averted_crime: s.tourism_uplift_per_averted_crime,
        baseline_name: s.names[0].clone(),
        levers: [lever(0), lever(1)],
    };
    let built = build_alternatives_from_model(&inputs)?;
    let evaluation = opportunity_cost(&built.alternatives, s.chosen)?;
    Ok(ScenarioSection {
        status_quo_p: enf.status_quo_p,
        tev_per_crime: enf.tev_per_crime,
        derivations: built.derivations,
        evaluation,
    })
}

/// Runs `sub` against already-loaded inputs.
pub fn run_with_inputs(sub: Subcommand, cfg: &RunConfig, inputs: &Inputs) -> Result<RunReport, AppError> {
    let needs_enforcement = sub.includes(Subcommand::Market) || sub.includes(Subcommand::Scenario);
    let funnel =
        if sub.includes(Subcommand::Funnel) || needs_enforcement { Some(funnel_section(cfg, inputs)?) } else { None };
    let tev = if sub.includes(Subcommand::Tev) || needs_enforcement { Some(tev_section(cfg, inputs)?) } else { None };
    let enf = match (&funnel, &tev) {
        (Some(f), Some(t)) if needs_enforcement => Some(enforcement(cfg, f, t)?),
        _ => None,
    };
    let market = match &enf {
        Some(e) if sub.includes(Subcommand::Market) => Some(market_section(cfg, e)?),
        _ => None,
    };
    let simulate = if sub.includes(Subcommand::Simulate) { Some(simulate_section(cfg)?) } else { None };
    let scenario = match &enf {
        Some(e) if sub.includes(Subcommand::Scenario) => Some(scenario_section(cfg, e)?),
        _ => None,
    };
    let calibrate = if sub.includes(Subcommand::Calibrate) {
        Some(CalibrateSection {
            targets: cfg.funnel.calibration_targets.clone(),
            calibration: calibrate_rubric(&inputs.records, &cfg.funnel.calibration_targets),
        })
    } else {
        None
    };

    let config = cfg.echo();
    let config_text: String = config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    Ok(RunReport {
        tool: TOOL.to_string(),
        subcommand: sub.name().to_string(),
        provenance: Provenance {
            tool_version: VERSION.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            input_sha256: inputs.checksums.clone(),
            seed: cfg.seed,
        },
        config,
        funnel: funnel.filter(|_| sub.includes(Subcommand::Funnel)),
        tev: tev.filter(|_| sub.includes(Subcommand::Tev)),
        market,
        simulate,
        scenario,
        calibrate,
    })
}

/// Loads inputs and runs `sub`. Writes nothing.
pub fn run(sub: Subcommand, cfg: &RunConfig) -> Result<RunReport, AppError> {
    let inputs = load_inputs(cfg)?;
    run_with_inputs(sub, cfg, &inputs)
}

/// Runs `sub` and writes the report into the configured output directory.
pub fn run_and_write(sub: Subcommand, cfg: &RunConfig) -> Result<(RunReport, Vec<PathBuf>), AppError> {
    let report = run(sub, cfg)?;
    let written = report.write(&cfg.output_dir)?;
    Ok((report, written))
}
