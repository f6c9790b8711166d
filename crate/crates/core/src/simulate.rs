//! Seeded Monte Carlo study of DCoVaR violations over a grid of levels.
//!
//! Each grid cell draws its own `n_obs` pairs from a generator split off
//! the scenario seed by cell index, so cells can run in any order.
//!
//! A violation is a draw whose target loss reaches the DCoVaR forecast
//! while the associate sits in its band: `S ≥ DCoVaR` and
//! `Y ∈ [Q_Y(δ), Q_Y(δ₁)]` in the upper tail, `S ≤ DCoVaR` and
//! `Y ∈ [Q_Y(δ_lo), Q_Y(δ)]` in the lower tail.

use std::io::Write;

use rand::RngCore;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::copula::CopulaModel;
use crate::dist::{Family, Marginal, MarginalModel};
use crate::error::{Result, RiskError};
use crate::io::{full, pct2, write_versioned_csv};
use crate::numerics::{open_unit, RngContract};
use crate::risk::{
    dcovar_copula, joint_significance, quantile_box, truncated_mean, AggregateParetoModel,
    DependentPair, LossModel, RiskLevels, Tail,
};

pub const DEFAULT_N_OBS: usize = 3000;
pub const MIN_N_OBS: usize = 100;

/// How the associate loss `Y` is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociateKind {
    /// `(U, V)` from the copula, both losses by quantile transform.
    Single,
    /// `Y = X₁ + X₂` drawn through its gamma mixture, target coupled by the
    /// conditional copula inverse.
    AggregateS2,
    /// `Y = Λ` drawn from its gamma law, target coupled as above.
    ParameterLambda,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pair: DependentPair,
    levels: Vec<RiskLevels>,
    n_obs: usize,
    seed: u64,
    associate_kind: AssociateKind,
}

impl SimScenario {
    pub fn new(
        pair: DependentPair,
        levels: Vec<RiskLevels>,
        n_obs: usize,
        seed: u64,
        associate_kind: AssociateKind,
    ) -> Result<Self> {
        if n_obs < MIN_N_OBS {
            return Err(RiskError::ParameterDomain(format!(
                "n_obs must be at least {MIN_N_OBS}, got {n_obs}"
            )));
        }
        if levels.is_empty() {
            return Err(RiskError::ParameterDomain("levels grid is empty".into()));
        }
        match (associate_kind, &pair.associate) {
            (AssociateKind::Single, _) => {}
            (AssociateKind::AggregateS2, LossModel::Aggregate(m)) if m.n() == 2 => {}
            (AssociateKind::AggregateS2, _) => {
                return Err(RiskError::ParameterDomain(
                    "aggregate mode needs a two-term aggregate associate".into(),
                ))
            }
            (AssociateKind::ParameterLambda, LossModel::Marginal(m))
                if matches!(m.family(), Family::Gamma { .. }) => {}
            (AssociateKind::ParameterLambda, _) => {
                return Err(RiskError::ParameterDomain(
                    "parameter mode needs a gamma associate".into(),
                ))
            }
        }
        Ok(Self {
            pair,
            levels,
            n_obs,
            seed,
            associate_kind,
        })
    }

    /// Target `Pareto(β₁)`, associate `Pareto(β_a)`, the given copula.
    pub fn pareto_single(beta1: f64, beta_a: f64, copula: CopulaModel) -> Result<DependentPair> {
        Ok(DependentPair::new(
            MarginalModel::pareto(beta1)?,
            MarginalModel::pareto(beta_a)?,
            copula,
        ))
    }

    /// Target `Pareto(β₁)`, associate `S₂` with `Λ ~ Gamma(γ, rate β_a)`.
    pub fn pareto_aggregate(
        beta1: f64,
        gamma: f64,
        beta_a: f64,
        copula: CopulaModel,
    ) -> Result<DependentPair> {
        Ok(DependentPair::new(
            MarginalModel::pareto(beta1)?,
            AggregateParetoModel::new(2, gamma, beta_a)?,
            copula,
        ))
    }

    /// Target `Pareto(β₁)`, associate `Λ ~ Gamma(τ, ω)`.
    pub fn pareto_parameter(
        beta1: f64,
        tau: f64,
        omega: f64,
        copula: CopulaModel,
    ) -> Result<DependentPair> {
        Ok(DependentPair::new(
            MarginalModel::pareto(beta1)?,
            MarginalModel::gamma(tau, omega)?,
            copula,
        ))
    }

    pub fn pair(&self) -> &DependentPair {
        &self.pair
    }

    pub fn levels(&self) -> &[RiskLevels] {
        &self.levels
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn associate_kind(&self) -> AssociateKind {
        self.associate_kind
    }

    /// One `(S, Y)` draw.
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let pair = &self.pair;
        let y = match (self.associate_kind, &pair.associate) {
            (AssociateKind::Single, _) => {
                let (u, v) = pair.copula.sample_pair(rng);
                return Ok((pair.target.quantile(u)?, pair.associate.quantile(v)?));
            }
            (AssociateKind::AggregateS2, LossModel::Aggregate(m)) => m.sample_mixture(rng).1,
            (AssociateKind::ParameterLambda, LossModel::Marginal(m)) => match m.family() {
                Family::Gamma { shape, scale } => Gamma::new(*shape, *scale)
                    .map_err(|e| RiskError::ParameterDomain(e.to_string()))?
                    .sample(rng),
                _ => unreachable!("checked in SimScenario::new"),
            },
            _ => unreachable!("checked in SimScenario::new"),
        };
        let v = pair.associate.cdf(y).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        // exchangeable copulas: U | V = v has conditional cdf h(v, ·)
        let u = pair.copula.h_inverse(v, open_unit(rng));
        Ok((pair.target.quantile(u)?, y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimCell {
    pub alpha: f64,
    pub delta: f64,
    pub a: f64,
    pub d: f64,
    pub joint_sig: f64,
    pub violations: usize,
    pub violations_pct: f64,
    pub dcovar: f64,
    pub mcovar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub copula: String,
    pub theta: f64,
    pub n_obs: usize,
    pub seed: u64,
    pub associate_kind: AssociateKind,
    pub cells: Vec<SimCell>,
}

pub const SIM_CSV_KIND: &str = "simulate";
pub const SIM_CSV_HEADER: [&str; 13] = [
    "alpha",
    "delta",
    "a",
    "d",
    "copula",
    "theta",
    "joint_sig_pct",
    "violations",
    "violations_pct",
    "dcovar",
    "mcovar",
    "joint_sig",
    "violations_rate",
];

impl SimReport {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                vec![
                    full(c.alpha),
                    full(c.delta),
                    full(c.a),
                    full(c.d),
                    self.copula.clone(),
                    full(self.theta),
                    pct2(c.joint_sig),
                    c.violations.to_string(),
                    pct2(c.violations_pct),
                    full(c.dcovar),
                    full(c.mcovar),
                    full(c.joint_sig),
                    full(c.violations_pct),
                ]
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_versioned_csv(out, SIM_CSV_KIND, &SIM_CSV_HEADER, &self.csv_rows())
    }
}

/// Runs every cell of the scenario.
pub fn run_scenario(s: &SimScenario) -> Result<SimReport> {
    let contract = RngContract::new(s.seed);
    let cells = s
        .levels
        .iter()
        .enumerate()
        .map(|(i, levels)| run_cell(s, levels, contract.split(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport {
        copula: s.pair.copula.family().name().to_string(),
        theta: s.pair.copula.theta(),
        n_obs: s.n_obs,
        seed: s.seed,
        associate_kind: s.associate_kind,
        cells,
    })
}

/// Runs one grid cell with the generator `s` would give cell `index`.
pub fn run_cell_at(s: &SimScenario, index: usize) -> Result<SimCell> {
    let levels = s.levels.get(index).ok_or_else(|| {
        RiskError::Domain(format!("cell {index} outside a grid of {}", s.levels.len()))
    })?;
    run_cell(s, levels, RngContract::new(s.seed).split(index as u64))
}

fn run_cell(s: &SimScenario, levels: &RiskLevels, contract: RngContract) -> Result<SimCell> {
    let joint_sig = joint_significance(&s.pair.copula, levels)?;
    let dcovar = dcovar_copula(&s.pair, levels)?;
    let (tl, th) = levels.target_band();
    let mcovar = truncated_mean(&s.pair.target, tl, th)?;
    let rect = quantile_box(&s.pair, levels)?;
    let mut rng = contract.generator();
    let mut violations = 0;
    for _ in 0..s.n_obs {
        let (x, y) = s.draw(&mut rng)?;
        let in_band = y >= rect.y_lo && y <= rect.y_hi;
        let beyond = match levels.tail() {
            Tail::Upper => x >= dcovar,
            Tail::Lower => x <= dcovar,
        };
        if in_band && beyond {
            violations += 1;
        }
    }
    Ok(SimCell {
        alpha: levels.alpha(),
        delta: levels.delta(),
        a: levels.a(),
        d: levels.d(),
        joint_sig,
        violations,
        violations_pct: violations as f64 / s.n_obs as f64,
        dcovar,
        mcovar,
    })
}

/// The `α × δ` grid used by the simulation tables.
pub fn table_grid(alphas: &[f64], deltas: &[f64], a: f64, d: f64) -> Result<Vec<RiskLevels>> {
    let mut grid = Vec::with_capacity(alphas.len() * deltas.len());
    for &alpha in alphas {
        for &delta in deltas {
            grid.push(RiskLevels::new(alpha, a, delta, d)?);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub delta: f64,
    pub dcovar: f64,
    pub mcovar: f64,
}

/// DCoVaR against δ at fixed `(α, a, d)`, with the δ-free MCoVaR alongside.
pub fn sweep_delta_curve(
    pair: &DependentPair,
    alpha: f64,
    a: f64,
    d: f64,
    delta_grid: &[f64],
) -> Result<Vec<CurvePoint>> {
    if let Some(&bad) = delta_grid.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(RiskError::Domain(format!("delta must lie in (0, 1), got {bad}")));
    }
    let first = RiskLevels::new(alpha, a, 0.5, d)?;
    let (tl, th) = first.target_band();
    let mcovar = truncated_mean(&pair.target, tl, th)?;
    delta_grid
        .iter()
        .map(|&delta| {
            let levels = RiskLevels::new(alpha, a, delta, d)?;
            Ok(CurvePoint {
                delta,
                dcovar: dcovar_copula(pair, &levels)?,
                mcovar,
            })
        })
        .collect()
}

pub const CURVE_CSV_KIND: &str = "curve";

pub fn write_curve_csv<W: Write>(out: W, points: &[CurvePoint]) -> Result<()> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![full(p.delta), full(p.dcovar), full(p.mcovar)])
        .collect();
    write_versioned_csv(out, CURVE_CSV_KIND, &["delta", "dcovar", "mcovar"], &rows)
}

/// Evenly spaced grid on `[lo, hi]` with `n ≥ 2` points.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
