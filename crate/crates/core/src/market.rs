//! Aggregate crime supply, the socially tolerated crime level, their
//! equilibrium, and the comparative statics of imprisonment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econ::{net_expected_return, EconError, OffenderProfile};
use crate::roots::{self, BisectFailure};

/// Equilibrium residual tolerance, relative to `cpp_max`.
pub const EQUILIBRIUM_REL_TOL: f64 = 1e-9;
pub const EQUILIBRIUM_MAX_ITER: u32 = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("elasticities sum to zero; imprisonment effect is undefined")]
    ZeroElasticitySum,
    #[error("damage at stake must be > 0, got {0}")]
    NonPositiveDamage(f64),
    #[error(
        "supply and tolerated crime do not cross on [{p_lo}, {p_hi}] \
         (excess supply {excess_lo:e} at p_lo, {excess_hi:e} at p_hi)"
    )]
    NoCrossing { p_lo: f64, p_hi: f64, excess_lo: f64, excess_hi: f64 },
    #[error("solver stopped after {iterations} iterations with residual {residual:e}")]
    NotConverged { iterations: u32, residual: f64 },
    #[error(transparent)]
    Econ(#[from] EconError),
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), MarketError> {
    if cond {
        Ok(())
    } else {
        Err(MarketError::InvalidParameter(msg()))
    }
}

/// Logistic supply of crimes per capita in the net expected return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyCurveParams {
    /// Saturation level of crimes per capita.
    pub cpp_max: f64,
    /// Responsiveness to net return.
    pub slope: f64,
    /// Net return at half saturation.
    pub midpoint: f64,
}

impl SupplyCurveParams {
    pub fn new(cpp_max: f64, slope: f64, midpoint: f64) -> Result<Self, MarketError> {
        let params = SupplyCurveParams { cpp_max, slope, midpoint };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        require(self.cpp_max.is_finite() && self.cpp_max > 0.0, || {
            format!("cpp_max must be > 0, got {}", self.cpp_max)
        })?;
        require(self.slope.is_finite() && self.slope > 0.0, || {
            format!("supply slope must be > 0, got {}", self.slope)
        })?;
        require(self.midpoint.is_finite(), || format!("midpoint must be finite, got {}", self.midpoint))
    }
}

/// `cpp_max / (1 + exp(-slope (g - midpoint)))` where `g` is the aggregate
/// offender's net expected return.
pub fn supply_cpp(params: &SupplyCurveParams, profile: &OffenderProfile) -> f64 {
    let g = net_expected_return(profile);
    params.cpp_max / (1.0 + (-params.slope * (g - params.midpoint)).exp())
}

/// Participation implied by [`supply_cpp`] at `lambda` crimes per offender.
pub fn supply_cpr(params: &SupplyCurveParams, profile: &OffenderProfile, lambda: f64) -> Result<f64, MarketError> {
    require(lambda.is_finite() && lambda > 0.0, || format!("lambda must be > 0, got {lambda}"))?;
    Ok(supply_cpp(params, profile) / lambda)
}

/// Society's tolerated crime level as a falling line in enforcement spend.
///
/// `tolerated(budget) = max(0, tolerable_at_zero_cost - budget / marginal_damage)`,
/// so `marginal_damage` is the spend society accepts per unit of crimes per
/// capita it stops tolerating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandConstraint {
    pub tolerable_at_zero_cost: f64,
    pub marginal_damage: f64,
}

impl DemandConstraint {
    pub fn new(tolerable_at_zero_cost: f64, marginal_damage: f64) -> Result<Self, MarketError> {
        let d = DemandConstraint { tolerable_at_zero_cost, marginal_damage };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        require(self.tolerable_at_zero_cost.is_finite() && self.tolerable_at_zero_cost >= 0.0, || {
            format!("tolerable crime level must be >= 0, got {}", self.tolerable_at_zero_cost)
        })?;
        require(self.marginal_damage > 0.0, || format!("marginal damage must be > 0, got {}", self.marginal_damage))
    }

    pub fn tolerated(&self, budget: f64) -> f64 {
        (self.tolerable_at_zero_cost - budget / self.marginal_damage).max(0.0)
    }
}

/// Elasticity of demand for crimes (`eta`) and of their supply (`epsilon`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawElasticities")]
pub struct Elasticities {
    eta: f64,
    epsilon: f64,
}

#[derive(Deserialize)]
struct RawElasticities {
    eta: f64,
    epsilon: f64,
}

impl TryFrom<RawElasticities> for Elasticities {
    type Error = MarketError;
    fn try_from(raw: RawElasticities) -> Result<Self, Self::Error> {
        Elasticities::new(raw.eta, raw.epsilon)
    }
}

impl Elasticities {
    pub fn new(eta: f64, epsilon: f64) -> Result<Self, MarketError> {
        require(eta.is_finite() && eta >= 0.0, || format!("eta must be >= 0, got {eta}"))?;
        require(epsilon.is_finite() && epsilon >= 0.0, || format!("epsilon must be >= 0, got {epsilon}"))?;
        if eta + epsilon <= 0.0 {
            return Err(MarketError::ZeroElasticitySum);
        }
        Ok(Elasticities { eta, epsilon })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Crimes averted by `delta_i` crime-equivalents of extra imprisonment:
/// `eta * delta_i / (epsilon + eta)`.
pub fn imprisonment_effect(el: &Elasticities, delta_i: f64) -> Result<f64, MarketError> {
    require(delta_i.is_finite() && delta_i >= 0.0, || format!("delta_i must be >= 0, got {delta_i}"))?;
    let denom = el.eta + el.epsilon;
    if denom <= 0.0 {
        return Err(MarketError::ZeroElasticitySum);
    }
    Ok(el.eta * delta_i / denom)
}

/// Maps enforcement spend, relative to the damage at stake, to a detention
/// probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnforcementResponseParams {
    pub p_floor: f64,
    pub p_max: f64,
    /// Detention probability gained per unit of `budget / damage`.
    pub efficiency: f64,
}

impl EnforcementResponseParams {
    pub fn new(p_floor: f64, p_max: f64, efficiency: f64) -> Result<Self, MarketError> {
        let params = EnforcementResponseParams { p_floor, p_max, efficiency };
        params.validate()?;
        Ok(params)
    }

    /// Chooses `efficiency` so that `budget` against `damage` yields `target_p`.
    pub fn calibrated(p_floor: f64, p_max: f64, budget: f64, damage: f64, target_p: f64) -> Result<Self, MarketError> {
        require(budget > 0.0, || format!("calibration budget must be > 0, got {budget}"))?;
        if !(damage > 0.0) {
            return Err(MarketError::NonPositiveDamage(damage));
        }
        require(target_p > p_floor && target_p <= p_max, || {
            format!("calibration target {target_p} must lie in ({p_floor}, {p_max}]")
        })?;
        Self::new(p_floor, p_max, (target_p - p_floor) * damage / budget)
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        require(0.0 <= self.p_floor && self.p_floor <= self.p_max && self.p_max <= 1.0, || {
            format!("need 0 <= p_floor ({}) <= p_max ({}) <= 1", self.p_floor, self.p_max)
        })?;
        require(self.efficiency.is_finite() && self.efficiency > 0.0, || {
            format!("efficiency must be > 0, got {}", self.efficiency)
        })
    }

    /// Smallest budget reaching detention probability `p`, the inverse of
    /// [`enforcement_response`] on `[p_floor, p_max]`.
    pub fn budget_for(&self, p: f64, damage: f64) -> f64 {
        (p.clamp(self.p_floor, self.p_max) - self.p_floor) * damage / self.efficiency
    }
}

/// `clamp(p_floor + efficiency * budget / damage, p_floor, p_max)`.
pub fn enforcement_response(
    budget_allocated: f64,
    tev_at_risk: f64,
    params: &EnforcementResponseParams,
) -> Result<f64, MarketError> {
    params.validate()?;
    if !(tev_at_risk > 0.0) {
        return Err(MarketError::NonPositiveDamage(tev_at_risk));
    }
    require(budget_allocated >= 0.0, || format!("budget must be >= 0, got {budget_allocated}"))?;
    let raw = params.p_floor + params.efficiency * (budget_allocated / tev_at_risk);
    Ok(if raw.is_nan() { params.p_max } else { raw.clamp(params.p_floor, params.p_max) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Crimes per capita at the crossing.
    pub crime_level: f64,
    pub p_star: f64,
    /// `|supply - tolerated|` at `p_star`.
    pub residual: f64,
    pub iterations: u32,
}

/// Finds `p` in `[p_lo, p_hi]` where `supply(p) == tolerated(p)` by
/// bisection. The residual tolerance is `EQUILIBRIUM_REL_TOL * scale`.
pub fn solve_crossing<S, T>(
    supply: S,
    tolerated: T,
    p_lo: f64,
    p_hi: f64,
    scale: f64,
) -> Result<Equilibrium, MarketError>
where
    S: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let tol = EQUILIBRIUM_REL_TOL * scale;
    let excess = |p: f64| supply(p) - tolerated(p);
    match roots::bisect(excess, p_lo, p_hi, tol, 0.0, EQUILIBRIUM_MAX_ITER) {
        Ok(b) => {
            let residual = b.value.abs();
            if residual >= tol && residual != 0.0 {
                return Err(MarketError::NotConverged { iterations: b.iterations, residual });
            }
            Ok(Equilibrium { crime_level: supply(b.root), p_star: b.root, residual, iterations: b.iterations })
        }
        Err(BisectFailure::NotBracketed { f_lo, f_hi }) => {
            Err(MarketError::NoCrossing { p_lo, p_hi, excess_lo: f_lo, excess_hi: f_hi })
        }
        Err(BisectFailure::NonFinite { at }) => {
            Err(MarketError::InvalidParameter(format!("supply or tolerated level is not a number at p = {at}")))
        }
    }
}

/// Equilibrium detention probability between logistic supply (with the base
/// profile's `p` replaced) and the demand constraint evaluated at the budget
/// the response curve needs to reach that `p`.
pub fn solve_equilibrium(
    supply: &SupplyCurveParams,
    demand: &DemandConstraint,
    base_profile: &OffenderProfile,
    response: &EnforcementResponseParams,
    tev_at_risk: f64,
) -> Result<Equilibrium, MarketError> {
    supply.validate()?;
    demand.validate()?;
    response.validate()?;
    base_profile.validate()?;
    if !(tev_at_risk > 0.0) {
        return Err(MarketError::NonPositiveDamage(tev_at_risk));
    }
    solve_crossing(
        |p| supply_cpp(supply, &base_profile.with_p(p)),
        |p| demand.tolerated(response.budget_for(p, tev_at_risk)),
        response.p_floor,
        response.p_max,
        supply.cpp_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn supply() -> SupplyCurveParams {
        SupplyCurveParams::new(0.01, 1.5, 0.5).unwrap()
    }

    #[test]
    fn supply_midpoint_is_half_saturation() {
        // wc - w = midpoint at p = 0
        let prof = OffenderProfile::new(10.5, 10.0, 3.0, 0.0).unwrap();
        assert!((supply_cpp(&supply(), &prof) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn supply_saturates_to_zero() {
        let prof = OffenderProfile::new(10.0, 1e9, 3.0, 0.1).unwrap();
        let cpp = supply_cpp(&supply(), &prof);
        assert!((0.0..1e-300).contains(&cpp));
    }

    #[test]
    fn supply_cpr_divides_by_lambda() {
        let prof = OffenderProfile::new(10.5, 10.0, 3.0, 0.0).unwrap();
        assert!((supply_cpr(&supply(), &prof, 5.0).unwrap() - 0.001).abs() < 1e-15);
        assert!(supply_cpr(&supply(), &prof, 0.0).is_err());
    }

    #[test]
    fn imprisonment_limits() {
        let full = imprisonment_effect(&Elasticities::new(1.0, 0.0).unwrap(), 100.0).unwrap();
        assert_eq!(full, 100.0);
        let elastic = imprisonment_effect(&Elasticities::new(1.0, 1e9).unwrap(), 100.0).unwrap();
        assert!((elastic - 1e-7).abs() < 1e-15);
        let half = imprisonment_effect(&Elasticities::new(1.0, 1.0).unwrap(), 10.0).unwrap();
        assert!((half - 5.0).abs() < 1e-12);
    }

    #[test]
    fn elasticity_validation() {
        assert_eq!(Elasticities::new(0.0, 0.0).unwrap_err(), MarketError::ZeroElasticitySum);
        assert!(Elasticities::new(-1.0, 2.0).is_err());
        assert!(serde_json::from_str::<Elasticities>(r#"{"eta":0,"epsilon":0}"#).is_err());
        assert!(imprisonment_effect(&Elasticities::new(1.0, 1.0).unwrap(), -1.0).is_err());
    }

    #[test]
    fn enforcement_response_clamps() {
        let params = EnforcementResponseParams::new(0.0, 0.4, 2.0).unwrap();
        assert_eq!(enforcement_response(0.0, 1e6, &params).unwrap(), 0.0);
        assert_eq!(enforcement_response(f64::MAX, 1.0, &params).unwrap(), 0.4);
        assert_eq!(enforcement_response(f64::INFINITY, 1.0, &params).unwrap(), 0.4);
        assert!((enforcement_response(1e4, 1e6, &params).unwrap() - 0.02).abs() < 1e-15);
        assert!(matches!(enforcement_response(1.0, 0.0, &params), Err(MarketError::NonPositiveDamage(_))));
        assert!(EnforcementResponseParams::new(0.2, 0.1, 1.0).is_err());
    }

    #[test]
    fn calibration_hits_target() {
        let params = EnforcementResponseParams::calibrated(0.0, 0.5, 2e6, 2e9, 0.01).unwrap();
        let p = enforcement_response(2e6, 2e9, &params).unwrap();
        assert!((p - 0.01).abs() < 1e-15);
        assert!((params.budget_for(0.01, 2e9) - 2e6).abs() < 1e-6);
    }

    #[test]
    fn flat_curves_return_floor() {
        let eq = solve_crossing(|_| 0.3, |_| 0.3, 0.05, 0.9, 1.0).unwrap();
        assert_eq!(eq.p_star, 0.05);
        assert_eq!(eq.residual, 0.0);
    }

    #[test]
    fn linear_curves_match_analytic_crossing() {
        // supply 0.8 - 2p, tolerated 0.1 + 0.5p  =>  p* = 0.7 / 2.5 = 0.28
        let eq = solve_crossing(|p| 0.8 - 2.0 * p, |p| 0.1 + 0.5 * p, 0.0, 1.0, 1.0).unwrap();
        assert!((eq.p_star - 0.28).abs() < 1e-6);
        assert!((eq.crime_level - 0.24).abs() < 1e-6);
        assert!(eq.residual < 1e-9);
    }

    #[test]
    fn non_bracketing_curves_fail() {
        let err = solve_crossing(|p| 1.0 - 0.1 * p, |_| 0.2, 0.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, MarketError::NoCrossing { .. }));
    }

    #[test]
    fn equilibrium_on_logistic_supply() {
        let s = SupplyCurveParams::new(0.01, 1.0, 0.0).unwrap();
        let d = DemandConstraint::new(0.005, 1e11).unwrap();
        let base = OffenderProfile::new(6.0, 4.0, 20.0, 0.01).unwrap();
        let resp = EnforcementResponseParams::calibrated(0.0, 0.5, 2e6, 2e9, 0.01).unwrap();
        let eq = solve_equilibrium(&s, &d, &base, &resp, 2e9).unwrap();
        assert!(eq.residual < EQUILIBRIUM_REL_TOL * s.cpp_max);
        let sup = supply_cpp(&s, &base.with_p(eq.p_star));
        let tol = d.tolerated(resp.budget_for(eq.p_star, 2e9));
        assert!((sup - tol).abs() < 1e-11);
        // g = 2 - 26p, roughly zero near p = 1/13
        assert!(eq.p_star > 0.07 && eq.p_star < 0.08, "p* = {}", eq.p_star);
    }

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    proptest! {
        #[test]
        fn supply_partials_have_analytic_sign(
            wc in 0f64..20.0, w in 0f64..20.0, s in 0.1f64..20.0, p in 0.05f64..0.95,
            slope in 0.1f64..3.0, mid in -5f64..5.0,
        ) {
            let params = SupplyCurveParams::new(1.0, slope, mid).unwrap();
            let at = |wc: f64, w: f64, s: f64| supply_cpp(&params, &OffenderProfile { wc, w, s, p });
            let base = at(wc, w, s);
            // Analytic derivative of the logistic: cpp' = slope * c (1 - c) * dg.
            let dlog = slope * base * (1.0 - base);
            prop_assume!(dlog > 1e-3);
            for (numeric, dg) in [
                (fd(|x| at(x, w, s), wc), 1.0 - p),
                (fd(|x| at(wc, x, s), w), -1.0),
                (fd(|x| at(wc, w, x), s), -p),
            ] {
                let analytic = dlog * dg;
                prop_assert_eq!(numeric.signum(), analytic.signum());
                prop_assert!((numeric - analytic).abs() <= 1e-3 * analytic.abs());
            }
        }

        #[test]
        fn imprisonment_effect_bounds(
            eta in 0f64..10.0, eps in 0f64..10.0, di in 0f64..1e4, k in 0f64..5.0, bump in 0.01f64..1.0,
        ) {
            prop_assume!(eta + eps > 1e-6);
            let el = Elasticities::new(eta, eps).unwrap();
            let c = imprisonment_effect(&el, di).unwrap();
            prop_assert!(c >= 0.0 && c <= di * (1.0 + 1e-15));
            let scaled = imprisonment_effect(&el, k * di).unwrap();
            prop_assert!((scaled - k * c).abs() <= 1e-9 * (k * c).max(1.0));
            let more_eps = imprisonment_effect(&Elasticities::new(eta, eps + bump).unwrap(), di).unwrap();
            prop_assert!(more_eps <= c);
            let more_eta = imprisonment_effect(&Elasticities::new(eta + bump, eps).unwrap(), di).unwrap();
            prop_assert!(more_eta >= c);
        }

        #[test]
        fn enforcement_response_bounded_and_monotone(
            floor in 0f64..0.3, span in 0f64..0.7, eff in 1e-3f64..10.0,
            b1 in 0f64..1e7, b2 in 0f64..1e7, tev in 1f64..1e8,
        ) {
            let params = EnforcementResponseParams::new(floor, floor + span, eff).unwrap();
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let p_lo = enforcement_response(lo, tev, &params).unwrap();
            let p_hi = enforcement_response(hi, tev, &params).unwrap();
            prop_assert!(p_lo >= params.p_floor && p_hi <= params.p_max);
            prop_assert!(p_lo <= p_hi);
        }
    }
}
