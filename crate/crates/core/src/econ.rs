//! Individual offender calculus and criminal-participation accounting.
//!
//! An offender compares the utility of a successful crime, discounted by
//! the risk of detention and penalised by the utility of the punishment,
//! against the utility of legal income:
//!
//! ```text
//! (1 - p) U(wc) - p U(s) > U(w)
//! ```
//!
//! The penalty term is evaluated as `U(s)` and subtracted, exactly as the
//! decision rule is written. This is not the textbook two-state expected
//! utility `(1 - p) U(wc) + p U(wc - s)`, and for utilities that go negative
//! (CRRA with `rho > 1` below income 1) it means a larger `p` can raise the
//! left-hand side. Callers relying on monotonicity in `p` must keep
//! `U(wc) + U(s) >= 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{self, BisectFailure};

/// Incomes below this are clamped before CRRA evaluation when `rho > 1`,
/// where the utility diverges at zero.
pub const CRRA_INCOME_FLOOR: f64 = 1e-9;

const PROBABILITY_SUM_TOL: f64 = 1e-9;
const CE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconError {
    #[error("CRRA utility is undefined for negative income {0}")]
    NegativeIncome(f64),
    #[error("invalid utility specification: {0}")]
    InvalidUtility(String),
    #[error("invalid offender profile: {0}")]
    InvalidProfile(String),
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("invalid lottery: {0}")]
    InvalidLottery(String),
}

/// Attitude to risk, expressed as a utility-of-income curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilitySpec {
    /// `U(x) = x`.
    RiskNeutral,
    /// Constant relative risk aversion, `U(x) = (x^(1-rho) - 1) / (1 - rho)`.
    Crra { rho: f64 },
    /// Piecewise linear around a reference income: slope 1 above,
    /// `loss_aversion` below.
    ReferencePoint { ref_income: f64, loss_aversion: f64 },
}

impl UtilitySpec {
    pub fn crra(rho: f64) -> Result<Self, EconError> {
        let spec = UtilitySpec::Crra { rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn reference_point(ref_income: f64, loss_aversion: f64) -> Result<Self, EconError> {
        let spec = UtilitySpec::ReferencePoint { ref_income, loss_aversion };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EconError> {
        match *self {
            UtilitySpec::RiskNeutral => Ok(()),
            UtilitySpec::Crra { rho } => {
                if !(rho.is_finite() && rho > 0.0) || rho == 1.0 {
                    Err(EconError::InvalidUtility(format!("CRRA rho must be finite, > 0 and != 1, got {rho}")))
                } else {
                    Ok(())
                }
            }
            UtilitySpec::ReferencePoint { ref_income, loss_aversion } => {
                if !ref_income.is_finite() {
                    return Err(EconError::InvalidUtility(format!(
                        "reference income must be finite, got {ref_income}"
                    )));
                }
                if !(loss_aversion.is_finite() && loss_aversion >= 1.0) {
                    return Err(EconError::InvalidUtility(format!("loss aversion must be >= 1, got {loss_aversion}")));
                }
                Ok(())
            }
        }
    }

    /// Evaluates `U(x)`.
    pub fn utility(&self, x: f64) -> Result<f64, EconError> {
        match *self {
            UtilitySpec::RiskNeutral => Ok(x),
            UtilitySpec::Crra { rho } => {
                if x < 0.0 {
                    return Err(EconError::NegativeIncome(x));
                }
                let x = if rho > 1.0 { x.max(CRRA_INCOME_FLOOR) } else { x };
                Ok((x.powf(1.0 - rho) - 1.0) / (1.0 - rho))
            }
            UtilitySpec::ReferencePoint { ref_income, loss_aversion } => {
                let d = x - ref_income;
                Ok(if d >= 0.0 { d } else { loss_aversion * d })
            }
        }
    }

    /// Closed-form inverse of `U` where one exists.
    fn inverse(&self, u: f64) -> Option<f64> {
        match *self {
            UtilitySpec::RiskNeutral => Some(u),
            UtilitySpec::Crra { rho } => {
                let base = (1.0 - rho) * u + 1.0;
                Some(base.max(0.0).powf(1.0 / (1.0 - rho)))
            }
            UtilitySpec::ReferencePoint { .. } => None,
        }
    }
}

/// The `(wc, w, s, p)` tuple an offender decides on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffenderProfile {
    /// Profit of a successful crime.
    pub wc: f64,
    /// Income from the legal job.
    pub w: f64,
    /// Monetised penalty, `>= 0`.
    pub s: f64,
    /// Probability of detention.
    pub p: f64,
}

impl OffenderProfile {
    pub fn new(wc: f64, w: f64, s: f64, p: f64) -> Result<Self, EconError> {
        let profile = OffenderProfile { wc, w, s, p };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), EconError> {
        if !self.wc.is_finite() || !self.w.is_finite() {
            return Err(EconError::InvalidProfile(format!(
                "incomes must be finite (wc = {}, w = {})",
                self.wc, self.w
            )));
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(EconError::InvalidProfile(format!("penalty must be >= 0, got {}", self.s)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(EconError::OutOfRange { name: "p", value: self.p, lo: 0.0, hi: 1.0 });
        }
        Ok(())
    }

    pub fn with_p(self, p: f64) -> Self {
        OffenderProfile { p, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Commit,
    Abstain,
}

/// Commit iff `(1 - p) U(wc) - p U(s) > U(w)`; ties abstain.
pub fn decide_crime(profile: &OffenderProfile, utility: &UtilitySpec) -> Result<Decision, EconError> {
    profile.validate()?;
    utility.validate()?;
    let lhs = (1.0 - profile.p) * utility.utility(profile.wc)? - profile.p * utility.utility(profile.s)?;
    let rhs = utility.utility(profile.w)?;
    Ok(if lhs > rhs { Decision::Commit } else { Decision::Abstain })
}

/// `(1 - p) wc - p s - w`.
pub fn net_expected_return(profile: &OffenderProfile) -> f64 {
    (1.0 - profile.p) * profile.wc - profile.p * profile.s - profile.w
}

/// Crimes per capita decomposed into participation and intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticipationStats {
    /// Crimes per capita per period.
    pub cpp: f64,
    /// Fraction of the population committing.
    pub cpr: f64,
    /// Crimes per active offender per period.
    pub lambda: f64,
}

impl ParticipationStats {
    /// Recovers `lambda = cpp / cpr`; `None` when nobody participates.
    pub fn lambda_from(cpp: f64, cpr: f64) -> Option<f64> {
        (cpr > 0.0).then(|| cpp / cpr)
    }
}

pub fn participation_decompose(cpr: f64, lambda: f64) -> Result<ParticipationStats, EconError> {
    if !(0.0..=1.0).contains(&cpr) {
        return Err(EconError::OutOfRange { name: "cpr", value: cpr, lo: 0.0, hi: 1.0 });
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(EconError::OutOfRange { name: "lambda", value: lambda, lo: 0.0, hi: f64::INFINITY });
    }
    Ok(ParticipationStats { cpp: cpr * lambda, cpr, lambda })
}

/// The sure amount whose utility equals the expected utility of `lottery`,
/// given as `(probability, outcome)` pairs.
pub fn certainty_equivalent(utility: &UtilitySpec, lottery: &[(f64, f64)]) -> Result<f64, EconError> {
    utility.validate()?;
    if lottery.is_empty() {
        return Err(EconError::InvalidLottery("no outcomes".into()));
    }
    let mut total = 0.0;
    for &(prob, x) in lottery {
        if !(0.0..=1.0).contains(&prob) {
            return Err(EconError::InvalidLottery(format!("probability {prob} outside [0, 1]")));
        }
        if !x.is_finite() {
            return Err(EconError::InvalidLottery(format!("non-finite outcome {x}")));
        }
        total += prob;
    }
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(EconError::InvalidLottery(format!("probabilities sum to {total}")));
    }

    let mut expected = 0.0;
    for &(prob, x) in lottery {
        expected += prob * utility.utility(x)?;
    }

    let (lo, hi) = lottery
        .iter()
        .filter(|(prob, _)| *prob > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, x)| (lo.min(x), hi.max(x)));

    if let Some(ce) = utility.inverse(expected) {
        // Inversion can drift by an ulp outside the outcome range.
        return Ok(ce.clamp(lo, hi));
    }
    if lo == hi {
        return Ok(lo);
    }
    let target = |x: f64| utility.utility(x).map(|u| u - expected).unwrap_or(f64::NAN);
    match roots::bisect(target, lo, hi, 0.0, CE_TOL, 200) {
        Ok(b) => Ok(b.root),
        Err(BisectFailure::NotBracketed { .. }) | Err(BisectFailure::NonFinite { .. }) => {
            Err(EconError::InvalidLottery("certainty equivalent not bracketed by outcomes".into()))
        }
    }
}
