use dcovar_core::copula::{CopulaFamily, CopulaModel};
use dcovar_core::dist::Marginal;
use dcovar_core::empirical::{ks_critical_1pct, ks_statistic, pseudo_observations, kendall_tau};
use dcovar_core::numerics::RngContract;
use dcovar_core::risk::RiskLevels;
use dcovar_core::simulate::*;

fn clayton7() -> CopulaModel {
    CopulaModel::new(CopulaFamily::Clayton, 7.0).unwrap()
}

fn table_levels() -> Vec<RiskLevels> {
    table_grid(&[0.9, 0.95], &[0.9, 0.925, 0.95], 0.1, 0.1).unwrap()
}

#[test]
fn clayton_table_violations_within_binomial_bands() {
    // printed counts out of 3000, α outer, δ inner
    let printed = [55.0, 38.0, 22.0, 35.0, 24.0, 12.0];
    let pair = SimScenario::pareto_single(1.5, 1.5, clayton7()).unwrap();
    let s = SimScenario::new(pair, table_levels(), 3000, 42, AssociateKind::Single).unwrap();
    let r = run_scenario(&s).unwrap();
    for (cell, count) in r.cells.iter().zip(printed) {
        let p: f64 = count / 3000.0;
        let band = 3.0 * (p * (1.0 - p) / 3000.0).sqrt();
        assert!(
            (cell.violations_pct - p).abs() <= band,
            "α={} δ={}: {} vs {p}",
            cell.alpha,
            cell.delta,
            cell.violations_pct
        );
    }
}

/// Probability of a violation: `S ≥ D` with `Y` in its band.
fn violation_probability(pair: &dcovar_core::risk::DependentPair, levels: &RiskLevels, d: f64) -> f64 {
    let (lo, hi) = levels.associate_band();
    pair.copula.rectangle_mass(pair.target.cdf(d), 1.0, lo, hi).unwrap()
}

fn check_rates(kind: AssociateKind, pair: dcovar_core::risk::DependentPair, seed: u64) {
    let n = 20_000;
    let s = SimScenario::new(pair.clone(), table_levels(), n, seed, kind).unwrap();
    let r = run_scenario(&s).unwrap();
    for (cell, levels) in r.cells.iter().zip(table_levels()) {
        let p = violation_probability(&pair, &levels, cell.dcovar);
        let band = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (cell.violations_pct - p).abs() <= band,
            "{kind:?} α={} δ={}: {} vs {p}",
            cell.alpha,
            cell.delta,
            cell.violations_pct
        );
    }
}

#[test]
fn violation_rates_match_rectangle_probability() {
    let g = CopulaModel::new(CopulaFamily::Gumbel, 6.3).unwrap();
    let f = CopulaModel::new(CopulaFamily::Frank, 25.0).unwrap();
    check_rates(AssociateKind::Single, SimScenario::pareto_single(1.5, 1.5, g).unwrap(), 1);
    check_rates(
        AssociateKind::AggregateS2,
        SimScenario::pareto_aggregate(1.5, 1.0, 1.5, clayton7()).unwrap(),
        2,
    );
    check_rates(
        AssociateKind::ParameterLambda,
        SimScenario::pareto_parameter(1.5, 1.0, 1.0, f).unwrap(),
        3,
    );
}

fn draws(kind: AssociateKind, pair: dcovar_core::risk::DependentPair, n: usize) -> Vec<(f64, f64)> {
    let s = SimScenario::new(pair, table_levels(), 100, 0, kind).unwrap();
    let mut rng = RngContract::new(99).generator();
    (0..n).map(|_| s.draw(&mut rng).unwrap()).collect()
}

#[test]
fn aggregate_mode_margins_and_dependence() {
    let pair = SimScenario::pareto_aggregate(1.5, 1.0, 1.5, clayton7()).unwrap();
    let xs = draws(AssociateKind::AggregateS2, pair.clone(), 5000);
    let s: Vec<f64> = xs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = xs.iter().map(|p| p.1).collect();
    let crit = ks_critical_1pct(5000);
    assert!(ks_statistic(&y, |v| pair.associate.cdf(v)) < crit);
    assert!(ks_statistic(&s, |v| pair.target.cdf(v)) < crit);
    let tau = kendall_tau(&pseudo_observations(&s, &y).unwrap());
    assert!((tau - 7.0 / 9.0).abs() < 0.02, "tau {tau}");
}

#[test]
fn parameter_mode_margins_and_dependence() {
    let g = CopulaModel::new(CopulaFamily::Gumbel, 2.0).unwrap();
    let pair = SimScenario::pareto_parameter(1.5, 1.0, 1.0, g).unwrap();
    let xs = draws(AssociateKind::ParameterLambda, pair.clone(), 5000);
    let s: Vec<f64> = xs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = xs.iter().map(|p| p.1).collect();
    let crit = ks_critical_1pct(5000);
    assert!(ks_statistic(&y, |v| 1.0 - (-v).exp()) < crit);
    assert!(ks_statistic(&s, |v| pair.target.cdf(v)) < crit);
    let tau = kendall_tau(&pseudo_observations(&s, &y).unwrap());
    assert!((tau - 0.5).abs() < 0.02, "tau {tau}");
}

#[test]
fn full_grids_are_deterministic_and_fast() {
    let start = std::time::Instant::now();
    for (family, theta) in [
        (CopulaFamily::Clayton, 7.0),
        (CopulaFamily::Gumbel, 6.3),
        (CopulaFamily::Frank, 25.0),
    ] {
        let c = CopulaModel::new(family, theta).unwrap();
        let pair = SimScenario::pareto_single(1.5, 1.5, c).unwrap();
        let s = SimScenario::new(pair, table_levels(), 3000, 42, AssociateKind::Single).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_scenario(&s).unwrap().write_csv(&mut a).unwrap();
        run_scenario(&s).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn curve_rises_with_delta_and_mcovar_is_flat() {
    let pair = SimScenario::pareto_single(1.5, 1.5, clayton7()).unwrap();
    let pts = sweep_delta_curve(&pair, 0.9, 0.1, 0.1, &linspace(0.9, 0.95, 11)).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].dcovar >= w[0].dcovar - 1e-7 * w[0].dcovar, "{w:?}");
        assert!((w[1].mcovar - w[0].mcovar).abs() <= 1e-10);
    }
    assert!(pts[10].dcovar > pts[0].dcovar);
}

#[test]
fn curves_for_every_associate() {
    let grid = linspace(0.9, 0.95, 6);
    let pairs = [
        SimScenario::pareto_single(1.5, 1.5, clayton7()).unwrap(),
        SimScenario::pareto_aggregate(1.5, 1.0, 1.5, clayton7()).unwrap(),
        SimScenario::pareto_parameter(1.5, 1.0, 1.0, clayton7()).unwrap(),
    ];
    for pair in pairs {
        let pts = sweep_delta_curve(&pair, 0.9, 0.1, 0.1, &grid).unwrap();
        assert!(pts.iter().all(|p| p.dcovar >= p.mcovar), "{pts:?}");
    }
}

#[test]
fn curve_rejects_levels_outside_unit_interval() {
    let pair = SimScenario::pareto_single(1.5, 1.5, clayton7()).unwrap();
    assert!(sweep_delta_curve(&pair, 0.9, 0.1, 0.1, &[0.9, 1.0]).is_err());
}
