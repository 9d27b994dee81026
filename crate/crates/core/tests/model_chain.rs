//! End-to-end checks of the default model chain against hand-derived values.

use approx::assert_relative_eq;

use heritage_econ::app::config::ConfigMap;
use heritage_econ::app::{run, RunConfig, Subcommand};
use heritage_econ::econ::UtilitySpec;
use heritage_econ::microsim::simulate_population;

#[test]
fn default_scenario_chain() {
    // TEV per crime: direct 2,500 (normative cap) + non-use 38,000.
    // Baseline: 2e6 spend buys the status-quo p = 0.01, so each extra 2e6
    // adds 0.01. Alternative 2: p = 0.035, extra imprisonment
    // 0.025 * 5,000 * 10 = 1,250, averted 1,250 / 3.
    let report = run(Subcommand::Scenario, &RunConfig::defaults()).unwrap();
    let sc = report.scenario.unwrap();
    assert_eq!(sc.tev_per_crime, 40_500.0);
    let d = &sc.derivations;
    assert_relative_eq!(d[1].p, 0.035, max_relative = 1e-12);
    assert_relative_eq!(d[1].delta_i, 1_250.0, max_relative = 1e-12);
    assert_relative_eq!(d[2].p, 0.26, max_relative = 1e-12);
    assert_relative_eq!(d[2].delta_i, 12_500.0, max_relative = 1e-12);

    let nets: Vec<f64> = sc.evaluation.alternatives.iter().map(|a| a.outcome.net).collect();
    assert_eq!(nets[0], -2_000_000.0);
    assert_relative_eq!(nets[1], 1_250.0 / 3.0 * 41_500.0 - 7_000_000.0, max_relative = 1e-12);
    assert_relative_eq!(nets[2], 12_500.0 / 3.0 * 41_500.0 - 102_000_000.0, max_relative = 1e-12);
    assert_eq!(sc.evaluation.ranking, vec![2, 1, 0]);
    assert!(sc.evaluation.chosen_dominated);
    assert_relative_eq!(sc.evaluation.opportunity_cost_of_chosen, nets[2]);
}

#[test]
fn zero_extra_budget_collapses_the_alternatives() {
    let mut raw = ConfigMap::defaults();
    raw.set("scenario.alt2.extra_budget", "0");
    raw.set("scenario.alt3.extra_budget", "0");
    let sc = run(Subcommand::Scenario, &RunConfig::from_map(raw).unwrap()).unwrap().scenario.unwrap();
    assert!(sc.evaluation.net_differences.iter().flatten().all(|d| *d == 0.0));
}

#[test]
fn equilibrium_lies_on_both_curves() {
    let m = run(Subcommand::Market, &RunConfig::defaults()).unwrap().market.unwrap();
    let eq = m.equilibrium;
    assert!(eq.p_star > m.status_quo_p, "status quo spend leaves crime above the tolerated level");
    let budget = m.response.budget_for(eq.p_star, m.tev_at_risk);
    let cfg = RunConfig::defaults();
    assert!((cfg.market.demand.tolerated(budget) - eq.crime_level).abs() < 1e-9 * cfg.market.supply.cpp_max);
}

#[test]
fn crra_population_still_offends_at_thousands_scale() {
    let mut spec = RunConfig::defaults().population_spec();
    spec.risk_mix = vec![(UtilitySpec::Crra { rho: 2.0 }, 1.0)];
    spec.n_agents = 2_000;
    let r = simulate_population(&spec).unwrap();
    assert!(r.cpr > 0.0, "cpr = {}", r.cpr);
    spec.risk_mix = vec![(UtilitySpec::RiskNeutral, 1.0)];
    let neutral = simulate_population(&spec).unwrap();
    assert!(r.cpr < neutral.cpr, "risk aversion lowers participation: {} vs {}", r.cpr, neutral.cpr);
}
