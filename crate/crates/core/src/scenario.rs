//! Net benefits of counteraction alternatives and the opportunity cost of
//! choosing one of them.
//!
//! Three alternatives are built from the model: keep the status quo, enhance
//! counteraction with extra budget, or counteract at the maximum by also
//! redirecting police, prosecution and court capacity from other crime
//! types. Opportunity cost is reported both as the best rejected net benefit
//! and as the matrix of pairwise net differences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{enforcement_response, imprisonment_effect, Elasticities, EnforcementResponseParams, MarketError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("need at least two alternatives, got {0}")]
    TooFewAlternatives(usize),
    #[error("chosen index {index} out of range for {len} alternatives")]
    BadChoice { index: usize, len: usize },
    #[error("alternative {name:?}: {field} must be >= 0, got {value}")]
    Negative { name: String, field: &'static str, value: f64 },
    #[error("invalid scenario input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAlternative {
    pub name: String,
    pub enforcement_budget: f64,
    /// Value of police, prosecution and court capacity pulled away from
    /// other crime types.
    pub redirected_resource_cost: f64,
    pub expected_crimes_averted: f64,
    pub tev_per_averted_crime: f64,
    pub tourism_uplift: f64,
}

impl ScenarioAlternative {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (field, value) in [
            ("enforcement_budget", self.enforcement_budget),
            ("redirected_resource_cost", self.redirected_resource_cost),
            ("expected_crimes_averted", self.expected_crimes_averted),
            ("tev_per_averted_crime", self.tev_per_averted_crime),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScenarioError::Negative { name: self.name.clone(), field, value });
            }
        }
        if !self.tourism_uplift.is_finite() {
            return Err(ScenarioError::InvalidInput(format!("{}: tourism uplift is not finite", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternativeOutcome {
    pub benefits: f64,
    pub costs: f64,
    pub net: f64,
}

pub fn evaluate_alternative(alt: &ScenarioAlternative) -> Result<AlternativeOutcome, ScenarioError> {
    alt.validate()?;
    let benefits = alt.expected_crimes_averted * alt.tev_per_averted_crime + alt.tourism_uplift;
    let costs = alt.enforcement_budget + alt.redirected_resource_cost;
    Ok(AlternativeOutcome { benefits, costs, net: benefits - costs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedAlternative {
    pub name: String,
    #[serde(flatten)]
    pub outcome: AlternativeOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetBenefitReport {
    pub alternatives: Vec<EvaluatedAlternative>,
    /// Input indices ordered by net benefit, best first; ties keep input order.
    pub ranking: Vec<usize>,
    pub chosen: usize,
    /// Best net benefit among the rejected alternatives.
    pub opportunity_cost_of_chosen: f64,
    /// Index of the rejected alternative that sets the opportunity cost.
    pub best_rejected: usize,
    /// A rejected alternative has a strictly higher net benefit.
    pub chosen_dominated: bool,
    /// `net_differences[i][j] = net_i - net_j`.
    pub net_differences: Vec<Vec<f64>>,
}

pub fn opportunity_cost(
    alternatives: &[ScenarioAlternative],
    chosen: usize,
) -> Result<NetBenefitReport, ScenarioError> {
    if alternatives.len() < 2 {
        return Err(ScenarioError::TooFewAlternatives(alternatives.len()));
    }
    if chosen >= alternatives.len() {
        return Err(ScenarioError::BadChoice { index: chosen, len: alternatives.len() });
    }
    let evaluated = alternatives
        .iter()
        .map(|a| Ok(EvaluatedAlternative { name: a.name.clone(), outcome: evaluate_alternative(a)? }))
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let nets: Vec<f64> = evaluated.iter().map(|e| e.outcome.net).collect();

    let mut ranking: Vec<usize> = (0..nets.len()).collect();
    ranking.sort_by(|&a, &b| nets[b].total_cmp(&nets[a]));

    let best_rejected = (0..nets.len())
        .filter(|&i| i != chosen)
        .reduce(|best, i| if nets[i] > nets[best] { i } else { best })
        .expect("at least one rejected alternative");
    let oc = nets[best_rejected];

    Ok(NetBenefitReport {
        ranking,
        chosen,
        opportunity_cost_of_chosen: oc,
        best_rejected,
        chosen_dominated: oc > nets[chosen],
        net_differences: nets.iter().map(|a| nets.iter().map(|b| a - b).collect()).collect(),
        alternatives: evaluated,
    })
}

/// Inputs to one non-baseline alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeLever {
    pub name: String,
    /// Spend on top of the baseline budget.
    pub extra_budget: f64,
    /// Share of the extra spend valued as capacity lost to other crime types.
    pub redirect_share: f64,
}

/// Upstream model outputs and the policy levers that turn them into
/// alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    /// Detention probability observed today, from the funnel.
    pub status_quo_p: f64,
    pub baseline_budget: f64,
    /// Damage at stake in one period, the denominator of the enforcement
    /// response.
    pub tev_at_risk: f64,
    pub tev_per_crime: f64,
    pub response: EnforcementResponseParams,
    pub elasticities: Elasticities,
    pub active_offenders: f64,
    pub lambda: f64,
    pub tourism_uplift_per_averted_crime: f64,
    pub baseline_name: String,
    pub levers: [AlternativeLever; 2],
}

/// Per-alternative audit trail of how it was derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeDerivation {
    pub name: String,
    pub budget: f64,
    pub p: f64,
    /// Extra imprisonment in crime equivalents.
    pub delta_i: f64,
    pub crimes_averted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltAlternatives {
    pub alternatives: Vec<ScenarioAlternative>,
    pub derivations: Vec<AlternativeDerivation>,
}

/// Builds the status quo and the two enhanced alternatives.
///
/// Raising detention from `p0` to `p` imprisons `(p - p0) * offenders`
/// more people, each removing `lambda` crimes a period, so
/// `delta_i = (p - p0) * offenders * lambda` crime equivalents. The crimes
/// actually averted follow from the imprisonment comparative statics.
pub fn build_alternatives_from_model(inputs: &ScenarioInputs) -> Result<BuiltAlternatives, ScenarioError> {
    let check = |name: &str, v: f64| -> Result<(), ScenarioError> {
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(ScenarioError::InvalidInput(format!("{name} must be >= 0, got {v}")))
        }
    };
    check("baseline budget", inputs.baseline_budget)?;
    check("active offenders", inputs.active_offenders)?;
    check("lambda", inputs.lambda)?;
    check("tev per crime", inputs.tev_per_crime)?;
    check("tourism uplift per averted crime", inputs.tourism_uplift_per_averted_crime)?;
    if !(0.0..=1.0).contains(&inputs.status_quo_p) {
        return Err(ScenarioError::InvalidInput(format!("status quo p = {} outside [0, 1]", inputs.status_quo_p)));
    }
    let p0 = inputs.status_quo_p;

    let mut alternatives = vec![ScenarioAlternative {
        name: inputs.baseline_name.clone(),
        enforcement_budget: inputs.baseline_budget,
        redirected_resource_cost: 0.0,
        expected_crimes_averted: 0.0,
        tev_per_averted_crime: inputs.tev_per_crime,
        tourism_uplift: 0.0,
    }];
    let mut derivations = vec![AlternativeDerivation {
        name: inputs.baseline_name.clone(),
        budget: inputs.baseline_budget,
        p: p0,
        delta_i: 0.0,
        crimes_averted: 0.0,
    }];

    for lever in &inputs.levers {
        check("extra budget", lever.extra_budget)?;
        if !(0.0..=1.0).contains(&lever.redirect_share) {
            return Err(ScenarioError::InvalidInput(format!(
                "{}: redirect share {} outside [0, 1]",
                lever.name, lever.redirect_share
            )));
        }
        let budget = inputs.baseline_budget + lever.extra_budget;
        let p = if lever.extra_budget == 0.0 {
            p0
        } else {
            enforcement_response(budget, inputs.tev_at_risk, &inputs.response)?.max(p0)
        };
        let delta_i = (p - p0) * inputs.active_offenders * inputs.lambda;
        let averted = imprisonment_effect(&inputs.elasticities, delta_i)?;
        alternatives.push(ScenarioAlternative {
            name: lever.name.clone(),
            enforcement_budget: budget,
            redirected_resource_cost: lever.redirect_share * lever.extra_budget,
            expected_crimes_averted: averted,
            tev_per_averted_crime: inputs.tev_per_crime,
            tourism_uplift: averted * inputs.tourism_uplift_per_averted_crime,
        });
        derivations.push(AlternativeDerivation {
            name: lever.name.clone(),
            budget,
            p,
            delta_i,
            crimes_averted: averted,
        });
    }
    Ok(BuiltAlternatives { alternatives, derivations })
}
