//! Run configuration.
//!
//! The config file is flat `key = value` text; `#` starts a comment. Every
//! key has a default, listed by [`KEYS`] and printed by `--help`. Offender
//! amounts (`offender.*`, `population.*`) are per-year figures in thousands
//! of the run currency; everything else is in plain run-currency units.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::econ::{OffenderProfile, UtilitySpec};
use crate::funnel::{CrimeCategory, DetectionRubric};
use crate::market::{DemandConstraint, Elasticities, SupplyCurveParams};
use crate::microsim::DistSpec;
use crate::valuation::{
    Currency, DirectApproach, DirectValueInput, MarketCombine, NonUseKind, PriceSource, RevenueStream,
    SecondaryActivityLedger,
};

use super::AppError;

/// `(key, default, description)`.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("currency", "EUR", "currency code shared by every money value in the run"),
    ("seed", "2015", "seed of the agent-based simulation"),
    ("output_dir", "out", "directory receiving report.json and the CSV tables"),
    // funnel
    ("funnel.csv", "bundled", "funnel statistics CSV, or 'bundled' for the 2000-2013 Bulgarian dataset"),
    ("funnel.status_quo_category", "total", "category whose detection risk is the status-quo p"),
    ("funnel.active_offenders", "5000", "active offenders (treasure hunters) per year"),
    ("funnel.lambda", "10", "crimes per active offender per year"),
    ("rubric.p_if_imprisonment", "0.01", "p when effective imprisonments reach their threshold"),
    ("rubric.p_if_conviction_only", "0.001", "p when only convictions reach their threshold"),
    ("rubric.p_if_inactive", "0", "p when neither threshold is reached"),
    ("rubric.imprisonment_threshold", "1", "mean effective imprisonments per year"),
    ("rubric.conviction_threshold", "1", "mean convicted persons per year"),
    (
        "calibrate.targets",
        "total:0.01, art208:0.001, art277a:0.01, art278:0.01, art278a:0.001, art278b:0",
        "category:p targets for rubric calibration",
    ),
    // valuation
    ("valuation.approach", "normative", "direct value approach: normative | market"),
    ("valuation.normative_cap", "2500", "ceiling of the normative direct value"),
    ("valuation.estimate", "none", "appraised value for the normative approach, or none"),
    ("valuation.comparables", "none", "market comparables, e.g. 'auction:5e6, insurance:8e6'"),
    ("valuation.market_combine", "max", "combination of comparables: max | mean | median"),
    ("valuation.before", "none", "secondary revenue before exhibition, e.g. 'restaurants:100, hotels:200'"),
    ("valuation.during", "none", "secondary revenue during exhibition, same format"),
    (
        "valuation.nonuse",
        "existence:15000, option:8000, educational:6000, prestige:4000, donation:5000",
        "non-use amounts used when no survey is given",
    ),
    ("valuation.scientific", "2000", "scientific part of the educational value, or none"),
    ("survey.csv", "none", "contingent-valuation survey CSV, or none"),
    ("survey.population", "1000000", "population the mean willingness to pay is scaled to"),
    ("survey.trim_fraction", "0.05", "upper-tail share of answers dropped per component, in [0, 0.25]"),
    ("tourism.gdp", "41.93e9", "GDP for the tourism baseline (82e9 BGN at 1.95583 BGN/EUR)"),
    ("tourism.share", "0.136", "tourism share of GDP"),
    ("tourism.cultural_share", "0.12", "cultural tourism share of tourism"),
    // market
    ("offender.wc", "6", "profit of a successful crime (aggregate offender)"),
    ("offender.w", "4", "legal income (aggregate offender)"),
    ("offender.s", "20", "monetised penalty (aggregate offender)"),
    ("supply.cpp_max", "0.01", "saturation of crimes per capita"),
    ("supply.slope", "1", "responsiveness of supply to net expected return"),
    ("supply.midpoint", "0", "net expected return at half saturation"),
    ("demand.tolerable_at_zero_cost", "0.005", "crimes per capita tolerated without enforcement spend"),
    ("demand.marginal_damage", "1e11", "spend accepted per unit of crimes per capita no longer tolerated"),
    ("elasticity.eta", "1", "elasticity of demand for crimes"),
    ("elasticity.epsilon", "2", "elasticity of supply of crimes"),
    ("enforcement.p_floor", "0", "detention probability without enforcement spend"),
    ("enforcement.p_max", "0.5", "cap on detention probability"),
    ("enforcement.efficiency", "auto", "p per unit of budget/damage; auto calibrates the baseline to the status-quo p"),
    ("enforcement.baseline_budget", "2000000", "current yearly enforcement spend"),
    ("market.delta_i", "100", "extra imprisonment, in crimes, for the elasticity sweep"),
    ("market.epsilon_grid", "0, 0.5, 1, 2, 5, 10, 1e9", "supply elasticities swept"),
    ("market.p_steps", "20", "grid steps of the supply curve over [p_floor, p_max]"),
    // microsim
    ("population.n_agents", "10000", "simulated agents"),
    ("population.wage", "lognormal(1.386, 0.25)", "legal income distribution"),
    ("population.crime_gain", "uniform(3, 8)", "crime profit distribution"),
    ("population.penalty", "constant(20)", "perceived penalty distribution"),
    (
        "population.risk_mix",
        "neutral:0.5, crra(2):0.5",
        "utility:weight list (neutral | crra(rho) | refpoint(income, loss_aversion))",
    ),
    ("population.p", "0.01", "detention probability of the base simulation"),
    ("population.lambda_active", "10", "mean crimes per committing agent per year"),
    ("simulate.p_values", "0, 0.001, 0.01, 0.05, 0.1, 0.2, 0.5", "detention probabilities swept"),
    // scenario
    ("scenario.chosen", "1", "alternative chosen by policy (1, 2 or 3)"),
    ("scenario.alt1.name", "not counteract strongly", "name of the status-quo alternative"),
    ("scenario.alt2.name", "enhance counteraction", "name of the second alternative"),
    ("scenario.alt2.extra_budget", "5000000", "extra yearly budget of the second alternative"),
    ("scenario.alt2.redirect_share", "0", "share of the extra budget pulled from other crime types"),
    ("scenario.alt3.name", "counteract at the maximum", "name of the third alternative"),
    ("scenario.alt3.extra_budget", "50000000", "extra yearly budget of the third alternative"),
    ("scenario.alt3.redirect_share", "1", "share of the extra budget pulled from other crime types"),
    ("scenario.tev_per_crime", "auto", "damage per crime; auto uses the TEV computed by the valuation chain"),
    ("scenario.tourism_uplift_per_averted_crime", "1000", "tourism revenue gained per averted crime"),
];

pub fn help_text() -> String {
    let width = KEYS.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("CONFIG KEYS (key = default  description):\n");
    for (k, d, h) in KEYS {
        s.push_str(&format!("  {k:<width$} = {d}\n  {:<width$}   {h}\n", ""));
    }
    s
}

/// Raw `key -> value` strings with defaults filled in.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn defaults() -> Self {
        ConfigMap(KEYS.iter().map(|(k, d, _)| (k.to_string(), d.to_string())).collect())
    }

    /// Overlays `text` on the defaults. Unknown keys are an error.
    pub fn parse(text: &str) -> Result<Self, AppError> {
        let mut map = Self::defaults();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| AppError::ConfigSyntax {
                line,
                message: format!("expected key = value, got {content:?}"),
            })?;
            let key = key.trim();
            if !map.0.contains_key(key) {
                return Err(AppError::UnknownKey { key: key.to_string(), line });
            }
            map.0.insert(key.to_string(), unquote(value.trim()).to_string());
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        assert!(self.0.contains_key(key), "unregistered config key {key}");
        self.0.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or_else(|| panic!("unregistered config key {key}"))
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    fn f64(&self, key: &str) -> Result<f64, AppError> {
        parse_f64(self.get(key)).map_err(|m| AppError::config(key, m))
    }

    fn u64(&self, key: &str) -> Result<u64, AppError> {
        self.get(key).parse().map_err(|e| AppError::config(key, format!("expected an integer: {e}")))
    }

    /// `None` for `none`/`auto`.
    fn opt_f64(&self, key: &str) -> Result<Option<f64>, AppError> {
        match self.get(key).to_ascii_lowercase().as_str() {
            "none" | "auto" | "" => Ok(None),
            _ => self.f64(key).map(Some),
        }
    }

    fn opt_path(&self, key: &str) -> Option<PathBuf> {
        match self.get(key) {
            v if v.eq_ignore_ascii_case("none") || v.is_empty() => None,
            v => Some(PathBuf::from(v)),
        }
    }

    fn pairs(&self, key: &str) -> Result<Vec<(String, String)>, AppError> {
        let v = self.get(key);
        if v.eq_ignore_ascii_case("none") || v.is_empty() {
            return Ok(Vec::new());
        }
        split_top_level(v)
            .into_iter()
            .map(|item| {
                item.rsplit_once(':')
                    .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                    .ok_or_else(|| AppError::config(key, format!("expected name:value, got {item:?}")))
            })
            .collect()
    }

    fn f64_pairs<T>(&self, key: &str, label: impl Fn(&str) -> Result<T, String>) -> Result<Vec<(T, f64)>, AppError> {
        self.pairs(key)?
            .into_iter()
            .map(|(name, v)| {
                let l = label(&name).map_err(|m| AppError::config(key, m))?;
                let x = parse_f64(&v).map_err(|m| AppError::config(key, m))?;
                Ok((l, x))
            })
            .collect()
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, AppError> {
        split_top_level(self.get(key))
            .into_iter()
            .map(|s| parse_f64(&s).map_err(|m| AppError::config(key, m)))
            .collect()
    }

    fn dist(&self, key: &str) -> Result<DistSpec, AppError> {
        parse_dist(self.get(key)).map_err(|m| AppError::config(key, m))
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let t = s.trim().replace('_', "");
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got {s:?}")),
    }
}

/// Splits on commas that are not inside parentheses.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// `name(a, b, ...)` -> `("name", [a, b, ...])`; a bare name has no args.
fn parse_call(s: &str) -> Result<(String, Vec<f64>), String> {
    let s = s.trim();
    match s.split_once('(') {
        None => Ok((s.to_ascii_lowercase(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| format!("unbalanced parentheses in {s:?}"))?;
            let args = inner.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
            Ok((name.trim().to_ascii_lowercase(), args))
        }
    }
}

pub fn parse_dist(s: &str) -> Result<DistSpec, String> {
    let (name, args) = parse_call(s)?;
    let dist = match (name.as_str(), args.as_slice()) {
        ("constant", [v]) => DistSpec::Constant { value: *v },
        ("uniform", [lo, hi]) => DistSpec::Uniform { lo: *lo, hi: *hi },
        ("lognormal", [mu, sigma]) => DistSpec::LogNormal { mu: *mu, sigma: *sigma },
        ("logistic", [loc, scale]) => DistSpec::Logistic { loc: *loc, scale: *scale },
        _ => {
            return Err(format!(
                "expected constant(v), uniform(lo, hi), lognormal(mu, sigma) or logistic(loc, scale), got {s:?}"
            ))
        }
    };
    dist.validate().map_err(|e| e.to_string())?;
    Ok(dist)
}

pub fn parse_utility(s: &str) -> Result<UtilitySpec, String> {
    let (name, args) = parse_call(s)?;
    let spec = match (name.as_str(), args.as_slice()) {
        ("neutral" | "riskneutral" | "risk_neutral", []) => UtilitySpec::RiskNeutral,
        ("crra", [rho]) => UtilitySpec::Crra { rho: *rho },
        ("refpoint" | "reference_point", [r, l]) => UtilitySpec::ReferencePoint { ref_income: *r, loss_aversion: *l },
        _ => return Err(format!("expected neutral, crra(rho) or refpoint(income, loss_aversion), got {s:?}")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn parse_source(s: &str) -> Result<PriceSource, String> {
    match s.to_ascii_lowercase().replace(['_', '-', ' '], "").as_str() {
        "auction" => Ok(PriceSource::Auction),
        "insurance" => Ok(PriceSource::Insurance),
        "blackmarket" => Ok(PriceSource::BlackMarket),
        "ticket" | "tickets" | "ticketrevenue" => Ok(PriceSource::TicketRevenue),
        _ => Err(format!("unknown price source {s:?}; expected auction, insurance, black_market or ticket_revenue")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunnelConfig {
    /// `None` means the bundled dataset.
    pub csv: Option<PathBuf>,
    pub status_quo_category: CrimeCategory,
    pub active_offenders: f64,
    pub lambda: f64,
    pub rubric: DetectionRubric,
    pub calibration_targets: BTreeMap<CrimeCategory, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationConfig {
    pub direct: DirectValueInput,
    pub before: SecondaryActivityLedger,
    pub during: SecondaryActivityLedger,
    pub nonuse: Vec<(NonUseKind, f64)>,
    pub scientific: Option<f64>,
    pub survey_csv: Option<PathBuf>,
    pub survey_population: u64,
    pub trim_fraction: f64,
    pub gdp: f64,
    pub tourism_share: f64,
    pub cultural_share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketConfig {
    pub offender: OffenderProfile,
    pub supply: SupplyCurveParams,
    pub demand: DemandConstraint,
    pub elasticities: Elasticities,
    pub p_floor: f64,
    pub p_max: f64,
    pub efficiency: Option<f64>,
    pub baseline_budget: f64,
    pub delta_i: f64,
    pub epsilon_grid: Vec<f64>,
    pub p_steps: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationConfig {
    pub n_agents: u64,
    pub wage: DistSpec,
    pub crime_gain: DistSpec,
    pub penalty: DistSpec,
    pub risk_mix: Vec<(UtilitySpec, f64)>,
    pub p: f64,
    pub lambda_active: f64,
    pub p_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Zero-based.
    pub chosen: usize,
    pub names: [String; 3],
    pub extra_budget: [f64; 2],
    pub redirect_share: [f64; 2],
    pub tev_per_crime: Option<f64>,
    pub tourism_uplift_per_averted_crime: f64,
}

/// Fully typed and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub raw: ConfigMap,
    pub currency: Currency,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub funnel: FunnelConfig,
    pub valuation: ValuationConfig,
    pub market: MarketConfig,
    pub population: PopulationConfig,
    pub scenario: ScenarioConfig,
}

impl RunConfig {
    pub fn from_map(raw: ConfigMap) -> Result<Self, AppError> {
        let currency: Currency = raw
            .get("currency")
            .parse()
            .map_err(|e: crate::valuation::ValuationError| AppError::config("currency", e.to_string()))?;

        let rubric = DetectionRubric::new(
            raw.f64("rubric.p_if_imprisonment")?,
            raw.f64("rubric.p_if_conviction_only")?,
            raw.f64("rubric.p_if_inactive")?,
            raw.f64("rubric.imprisonment_threshold")?,
            raw.f64("rubric.conviction_threshold")?,
        )
        .map_err(|e| AppError::config("rubric.*", e.to_string()))?;
        let calibration_targets: BTreeMap<CrimeCategory, f64> = raw
            .f64_pairs("calibrate.targets", |s| s.parse::<CrimeCategory>().map_err(|e| e.to_string()))?
            .into_iter()
            .collect();
        if calibration_targets.values().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(AppError::config("calibrate.targets", "probabilities must lie in [0, 1]"));
        }
        let funnel = FunnelConfig {
            csv: match raw.get("funnel.csv") {
                v if v.eq_ignore_ascii_case("bundled") => None,
                v => Some(PathBuf::from(v)),
            },
            status_quo_category: raw.get("funnel.status_quo_category").parse().map_err(
                |e: crate::funnel::FunnelError| AppError::config("funnel.status_quo_category", e.to_string()),
            )?,
            active_offenders: positive(&raw, "funnel.active_offenders")?,
            lambda: positive(&raw, "funnel.lambda")?,
            rubric,
            calibration_targets,
        };

        let approach = match raw.get("valuation.approach").to_ascii_lowercase().as_str() {
            "normative" => DirectApproach::Normative,
            "market" => DirectApproach::Market,
            other => {
                return Err(AppError::config(
                    "valuation.approach",
                    format!("expected normative or market, got {other:?}"),
                ))
            }
        };
        let combine = match raw.get("valuation.market_combine").to_ascii_lowercase().as_str() {
            "max" => MarketCombine::Max,
            "mean" => MarketCombine::Mean,
            "median" => MarketCombine::Median,
            other => {
                return Err(AppError::config(
                    "valuation.market_combine",
                    format!("expected max, mean or median, got {other:?}"),
                ))
            }
        };
        let direct = DirectValueInput {
            approach,
            normative_cap: non_negative(&raw, "valuation.normative_cap")?,
            estimate: raw.opt_f64("valuation.estimate")?,
            comparables: raw.f64_pairs("valuation.comparables", parse_source)?,
            combine,
        };
        if direct.comparables.iter().any(|(_, a)| *a < 0.0) || direct.estimate.is_some_and(|e| e < 0.0) {
            return Err(AppError::config("valuation.comparables", "amounts must be >= 0"));
        }
        if approach == DirectApproach::Market && direct.comparables.is_empty() {
            return Err(AppError::config("valuation.comparables", "the market approach needs at least one comparable"));
        }
        let ledger = |key: &str| -> Result<SecondaryActivityLedger, AppError> {
            let streams = raw.f64_pairs(key, |s| s.parse::<RevenueStream>().map_err(|e| e.to_string()))?;
            SecondaryActivityLedger::new(key.trim_start_matches("valuation."), streams)
                .map_err(|e| AppError::config(key, e.to_string()))
        };
        let nonuse = raw.f64_pairs("valuation.nonuse", |s| s.parse::<NonUseKind>().map_err(|e| e.to_string()))?;
        let mut seen = Vec::new();
        for (k, a) in &nonuse {
            if seen.contains(k) {
                return Err(AppError::config("valuation.nonuse", format!("{k} listed twice")));
            }
            if *a < 0.0 {
                return Err(AppError::config("valuation.nonuse", format!("{k} amount must be >= 0")));
            }
            seen.push(*k);
        }
        let scientific = raw.opt_f64("valuation.scientific")?;
        if let Some(sci) = scientific {
            let edu = nonuse.iter().find(|(k, _)| *k == NonUseKind::Educational).map_or(0.0, |(_, a)| *a);
            if sci < 0.0 || (raw.opt_path("survey.csv").is_none() && sci > edu) {
                return Err(AppError::config("valuation.scientific", format!("must lie in [0, educational = {edu}]")));
            }
        }
        let trim_fraction = raw.f64("survey.trim_fraction")?;
        if !(0.0..=0.25).contains(&trim_fraction) {
            return Err(AppError::config("survey.trim_fraction", "must lie in [0, 0.25]"));
        }
        let valuation = ValuationConfig {
            direct,
            before: ledger("valuation.before")?,
            during: ledger("valuation.during")?,
            nonuse,
            scientific,
            survey_csv: raw.opt_path("survey.csv"),
            survey_population: match raw.u64("survey.population")? {
                0 => return Err(AppError::config("survey.population", "must be > 0")),
                n => n,
            },
            trim_fraction,
            gdp: non_negative(&raw, "tourism.gdp")?,
            tourism_share: fraction(&raw, "tourism.share")?,
            cultural_share: fraction(&raw, "tourism.cultural_share")?,
        };

        let offender =
            OffenderProfile::new(raw.f64("offender.wc")?, raw.f64("offender.w")?, raw.f64("offender.s")?, 0.0)
                .map_err(|e| AppError::config("offender.*", e.to_string()))?;
        let supply =
            SupplyCurveParams::new(raw.f64("supply.cpp_max")?, raw.f64("supply.slope")?, raw.f64("supply.midpoint")?)
                .map_err(|e| AppError::config("supply.*", e.to_string()))?;
        let demand =
            DemandConstraint::new(raw.f64("demand.tolerable_at_zero_cost")?, raw.f64("demand.marginal_damage")?)
                .map_err(|e| AppError::config("demand.*", e.to_string()))?;
        let elasticities = Elasticities::new(raw.f64("elasticity.eta")?, raw.f64("elasticity.epsilon")?)
            .map_err(|e| AppError::config("elasticity.*", e.to_string()))?;
        let p_floor = fraction(&raw, "enforcement.p_floor")?;
        let p_max = fraction(&raw, "enforcement.p_max")?;
        if p_floor > p_max {
            return Err(AppError::config("enforcement.p_floor", "must not exceed enforcement.p_max"));
        }
        let efficiency = raw.opt_f64("enforcement.efficiency")?;
        if efficiency.is_some_and(|e| e <= 0.0) {
            return Err(AppError::config("enforcement.efficiency", "must be > 0 or auto"));
        }
        let epsilon_grid = raw.f64_list("market.epsilon_grid")?;
        if epsilon_grid.iter().any(|e| *e < 0.0) {
            return Err(AppError::config("market.epsilon_grid", "elasticities must be >= 0"));
        }
        let market = MarketConfig {
            offender,
            supply,
            demand,
            elasticities,
            p_floor,
            p_max,
            efficiency,
            baseline_budget: positive(&raw, "enforcement.baseline_budget")?,
            delta_i: non_negative(&raw, "market.delta_i")?,
            epsilon_grid,
            p_steps: match raw.u64("market.p_steps")? {
                0 => return Err(AppError::config("market.p_steps", "must be > 0")),
                n => u32::try_from(n).map_err(|_| AppError::config("market.p_steps", "too large"))?,
            },
        };

        let risk_mix = raw.f64_pairs("population.risk_mix", parse_utility)?;
        let p_values = raw.f64_list("simulate.p_values")?;
        if p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(AppError::config("simulate.p_values", "probabilities must lie in [0, 1]"));
        }
        let population = PopulationConfig {
            n_agents: raw.u64("population.n_agents")?,
            wage: raw.dist("population.wage")?,
            crime_gain: raw.dist("population.crime_gain")?,
            penalty: raw.dist("population.penalty")?,
            risk_mix,
            p: fraction(&raw, "population.p")?,
            lambda_active: positive(&raw, "population.lambda_active")?,
            p_values,
        };

        let chosen = raw.u64("scenario.chosen")?;
        if !(1..=3).contains(&chosen) {
            return Err(AppError::config("scenario.chosen", "must be 1, 2 or 3"));
        }
        let scenario = ScenarioConfig {
            chosen: chosen as usize - 1,
            names: [
                raw.get("scenario.alt1.name").to_string(),
                raw.get("scenario.alt2.name").to_string(),
                raw.get("scenario.alt3.name").to_string(),
            ],
            extra_budget: [
                non_negative(&raw, "scenario.alt2.extra_budget")?,
                non_negative(&raw, "scenario.alt3.extra_budget")?,
            ],
            redirect_share: [
                fraction(&raw, "scenario.alt2.redirect_share")?,
                fraction(&raw, "scenario.alt3.redirect_share")?,
            ],
            tev_per_crime: raw.opt_f64("scenario.tev_per_crime")?,
            tourism_uplift_per_averted_crime: non_negative(&raw, "scenario.tourism_uplift_per_averted_crime")?,
        };
        if scenario.tev_per_crime.is_some_and(|t| t < 0.0) {
            return Err(AppError::config("scenario.tev_per_crime", "must be >= 0 or auto"));
        }

        let cfg = RunConfig {
            currency,
            seed: raw.u64("seed")?,
            output_dir: PathBuf::from(raw.get("output_dir")),
            funnel,
            valuation,
            market,
            population,
            scenario,
            raw,
        };
        cfg.population_spec().validate().map_err(|e| AppError::config("population.*", e.to_string()))?;
        Ok(cfg)
    }

    pub fn defaults() -> Self {
        Self::from_map(ConfigMap::defaults()).expect("defaults are valid")
    }

    pub fn population_spec(&self) -> crate::microsim::PopulationSpec {
        let p = &self.population;
        crate::microsim::PopulationSpec {
            n_agents: p.n_agents,
            wage_dist: p.wage,
            crime_gain_dist: p.crime_gain,
            penalty_perception_dist: p.penalty,
            risk_mix: p.risk_mix.clone(),
            p: p.p,
            lambda_active: p.lambda_active,
            seed: self.seed,
        }
    }

    /// Effective configuration echoed into reports: every key with defaults
    /// resolved, minus the output location.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = self.raw.entries().clone();
        m.remove("output_dir");
        m
    }
}

fn positive(raw: &ConfigMap, key: &str) -> Result<f64, AppError> {
    let v = raw.f64(key)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(AppError::config(key, format!("must be > 0, got {v}")))
    }
}

fn non_negative(raw: &ConfigMap, key: &str) -> Result<f64, AppError> {
    let v = raw.f64(key)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(AppError::config(key, format!("must be >= 0, got {v}")))
    }
}

fn fraction(raw: &ConfigMap, key: &str) -> Result<f64, AppError> {
    let v = raw.f64(key)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(AppError::config(key, format!("must lie in [0, 1], got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let cfg = RunConfig::defaults();
        assert_eq!(cfg.currency, Currency::EUR);
        assert_eq!(cfg.funnel.calibration_targets.len(), 6);
        assert_eq!(cfg.population.risk_mix.len(), 2);
        assert_eq!(cfg.valuation.nonuse.len(), 5);
        assert!(cfg.funnel.csv.is_none());
        assert!(!cfg.echo().contains_key("output_dir"));
    }

    #[test]
    fn every_key_in_help() {
        let help = help_text();
        for (k, _, _) in KEYS {
            assert!(help.contains(k));
        }
    }

    #[test]
    fn overrides_and_comments() {
        let map = ConfigMap::parse("# comment\nseed = 7  # trailing\n\nvaluation.approach = \"market\"\nvaluation.comparables = auction:5e6, insurance:8e6\n").unwrap();
        let cfg = RunConfig::from_map(map).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.valuation.direct.comparables, vec![(PriceSource::Auction, 5e6), (PriceSource::Insurance, 8e6)]);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ConfigMap::parse("seed = 1\nsupply.bogus = 3\n").unwrap_err();
        assert!(matches!(err, AppError::UnknownKey { line: 2, .. }));
        assert!(matches!(ConfigMap::parse("just words").unwrap_err(), AppError::ConfigSyntax { .. }));
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "elasticity.eta = 0\nelasticity.epsilon = 0",
            "elasticity.eta = -1",
            "valuation.nonuse = aesthetic:100",
            "population.risk_mix = neutral:0.5",
            "population.wage = gamma(1, 2)",
            "scenario.chosen = 4",
            "rubric.p_if_inactive = 0.5",
            "currency = EURO",
            "valuation.approach = market",
        ] {
            let map = ConfigMap::parse(text).unwrap();
            assert!(RunConfig::from_map(map).is_err(), "{text}");
        }
    }

    #[test]
    fn nested_lists() {
        assert_eq!(split_top_level("refpoint(5, 2):0.5, crra(2):0.5"), vec!["refpoint(5, 2):0.5", "crra(2):0.5"]);
        assert_eq!(
            parse_utility("refpoint(5, 2)").unwrap(),
            UtilitySpec::ReferencePoint { ref_income: 5.0, loss_aversion: 2.0 }
        );
        assert_eq!(parse_dist("logistic(0, 1.5)").unwrap(), DistSpec::Logistic { loc: 0.0, scale: 1.5 });
        assert!(parse_utility("crra(1)").is_err());
    }
}
