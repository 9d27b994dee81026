//! Seeded agent-based population applying the offender decision rule agent
//! by agent.
//!
//! Every agent owns a ChaCha8 stream selected by its index under the run
//! seed, so results do not depend on how the population is split across
//! threads. A sweep over `p` reuses the same draws for every `p` (common
//! random numbers), which makes the participation curve comparable point to
//! point without Monte Carlo noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econ::{decide_crime, Decision, EconError, OffenderProfile, UtilitySpec};

const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid population spec: {0}")]
    InvalidSpec(String),
    #[error("agent {agent}: {source}")]
    Agent {
        agent: u64,
        #[source]
        source: EconError,
    },
}

/// Distribution of one agent attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    Constant {
        value: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Logistic with location `loc` and scale `scale`.
    Logistic {
        loc: f64,
        scale: f64,
    },
}

impl DistSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = match *self {
            DistSpec::Constant { value } => value.is_finite(),
            DistSpec::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
            DistSpec::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma >= 0.0,
            DistSpec::Logistic { loc, scale } => loc.is_finite() && scale.is_finite() && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidSpec(format!("invalid distribution {self:?}")))
        }
    }

    /// Draws one value; `Constant` consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistSpec::Constant { value } => value,
            DistSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            DistSpec::LogNormal { mu, sigma } => LogNormal::new(mu, sigma).expect("validated lognormal").sample(rng),
            DistSpec::Logistic { loc, scale } => {
                // Open interval keeps the logit finite.
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                loc + scale * (u / (1.0 - u)).ln()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub n_agents: u64,
    pub wage_dist: DistSpec,
    pub crime_gain_dist: DistSpec,
    pub penalty_perception_dist: DistSpec,
    /// Utility variants and their population weights, summing to 1.
    pub risk_mix: Vec<(UtilitySpec, f64)>,
    pub p: f64,
    /// Mean crimes per committing agent per period.
    pub lambda_active: f64,
    pub seed: u64,
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_agents == 0 {
            return Err(SimError::InvalidSpec("n_agents must be > 0".into()));
        }
        self.wage_dist.validate()?;
        self.crime_gain_dist.validate()?;
        self.penalty_perception_dist.validate()?;
        if let DistSpec::Uniform { lo, .. } | DistSpec::Constant { value: lo } = self.penalty_perception_dist {
            if lo < 0.0 {
                return Err(SimError::InvalidSpec("penalties must be >= 0".into()));
            }
        }
        if matches!(self.penalty_perception_dist, DistSpec::Logistic { .. }) {
            return Err(SimError::InvalidSpec("a logistic penalty distribution can go negative".into()));
        }
        if self.risk_mix.is_empty() {
            return Err(SimError::InvalidSpec("risk_mix is empty".into()));
        }
        let mut total = 0.0;
        for (u, w) in &self.risk_mix {
            u.validate().map_err(|e| SimError::InvalidSpec(e.to_string()))?;
            if !(w.is_finite() && *w >= 0.0) {
                return Err(SimError::InvalidSpec(format!("risk weight {w} must be >= 0")));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(SimError::InvalidSpec(format!("risk weights sum to {total}, not 1")));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SimError::InvalidSpec(format!("p = {} outside [0, 1]", self.p)));
        }
        if !(self.lambda_active.is_finite() && self.lambda_active > 0.0) {
            return Err(SimError::InvalidSpec(format!("lambda_active must be > 0, got {}", self.lambda_active)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub cpr: f64,
    pub lambda_realized: f64,
    pub cpp: f64,
    pub n_committing: u64,
    pub total_crimes: u64,
    /// Binomial standard error of `cpr`.
    pub stderr_cpr: f64,
}

/// One agent's draws, independent of `p`.
#[derive(Debug, Clone, Copy)]
struct AgentDraw {
    w: f64,
    wc: f64,
    s: f64,
    utility: UtilitySpec,
    crimes_if_active: u64,
}

/// RNG for agent `index` under `seed`.
pub fn agent_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn pick_utility(mix: &[(UtilitySpec, f64)], u: f64) -> UtilitySpec {
    let mut acc = 0.0;
    for (spec, w) in mix {
        acc += w;
        if u < acc {
            return *spec;
        }
    }
    mix.last().expect("non-empty risk mix").0
}

fn draw_agent(spec: &PopulationSpec, poisson: &Poisson<f64>, index: u64) -> AgentDraw {
    let mut rng = agent_rng(spec.seed, index);
    let w = spec.wage_dist.sample(&mut rng);
    let wc = spec.crime_gain_dist.sample(&mut rng);
    let s = spec.penalty_perception_dist.sample(&mut rng);
    let utility = pick_utility(&spec.risk_mix, rng.random::<f64>());
    let crimes_if_active = poisson.sample(&mut rng) as u64;
    AgentDraw { w, wc, s, utility, crimes_if_active }
}

fn draw_population(spec: &PopulationSpec) -> Result<Vec<AgentDraw>, SimError> {
    spec.validate()?;
    let poisson = Poisson::new(spec.lambda_active)
        .map_err(|e| SimError::InvalidSpec(format!("poisson({}): {e}", spec.lambda_active)))?;
    Ok((0..spec.n_agents).into_par_iter().map(|i| draw_agent(spec, &poisson, i)).collect())
}

fn evaluate(draws: &[AgentDraw], p: f64) -> Result<SimResult, SimError> {
    let outcomes: Vec<Result<Option<u64>, SimError>> = draws
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let profile = OffenderProfile { wc: a.wc, w: a.w, s: a.s, p };
            match decide_crime(&profile, &a.utility) {
                Ok(Decision::Commit) => Ok(Some(a.crimes_if_active)),
                Ok(Decision::Abstain) => Ok(None),
                Err(source) => Err(SimError::Agent { agent: i as u64, source }),
            }
        })
        .collect();

    let mut n_committing = 0u64;
    let mut total_crimes = 0u64;
    for o in outcomes {
        if let Some(c) = o? {
            n_committing += 1;
            total_crimes += c;
        }
    }
    let n = draws.len() as f64;
    let cpr = n_committing as f64 / n;
    let lambda_realized = if n_committing > 0 { total_crimes as f64 / n_committing as f64 } else { 0.0 };
    Ok(SimResult {
        cpr,
        lambda_realized,
        cpp: cpr * lambda_realized,
        n_committing,
        total_crimes,
        stderr_cpr: (cpr * (1.0 - cpr) / n).sqrt(),
    })
}

pub fn simulate_population(spec: &PopulationSpec) -> Result<SimResult, SimError> {
    let draws = draw_population(spec)?;
    evaluate(&draws, spec.p)
}

/// Re-evaluates one set of agent draws at each `p`.
pub fn enforcement_sweep(spec: &PopulationSpec, p_values: &[f64]) -> Result<Vec<(f64, SimResult)>, SimError> {
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(SimError::InvalidSpec(format!("sweep p = {bad} outside [0, 1]")));
    }
    let draws = draw_population(spec)?;
    p_values.iter().map(|&p| evaluate(&draws, p).map(|r| (p, r))).collect()
}
