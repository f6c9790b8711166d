//! GARCH(1,1) with Student-t innovations.
//!
//! `X_t = ε_t √h_t`, `h_t = κ₀ + κ₁ X²_{t−1} + η h_{t−1}`. By default `ε_t`
//! is the unit-variance t; [`Innovation::Raw`] switches to the plain t.

use std::io::Write;

use rand::RngCore;
use rand_distr::{Distribution, StudentT};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::copula::{fit_mle as fit_copula, CopulaFamily, CopulaFit, CopulaModel};
use crate::dist::{Marginal, MarginalModel};
use crate::empirical::{pseudo_observations, variance};
use crate::error::{Result, RiskError};
use crate::io::{full, pct2, write_versioned_csv};
use crate::numerics::minimize_simplex;
use crate::risk::{dcovar_copula, joint_significance, DependentPair, RiskLevels, Tail};

pub const MIN_FIT_OBS: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Innovation {
    /// t scaled to unit variance by `√((ν−2)/ν)`.
    #[default]
    Standardized,
    /// Plain t with variance `ν/(ν−2)`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GarchSpec {
    kappa0: f64,
    kappa1: f64,
    eta: f64,
    nu: f64,
}

impl GarchSpec {
    pub fn new(kappa0: f64, kappa1: f64, eta: f64, nu: f64) -> Result<Self> {
        let ok = kappa0.is_finite()
            && kappa0 > 0.0
            && kappa1 >= 0.0
            && eta >= 0.0
            && kappa1 + eta < 1.0
            && nu > 2.0;
        if !ok {
            return Err(RiskError::ParameterDomain(format!(
                "GARCH needs κ₀ > 0, κ₁, η ≥ 0, κ₁ + η < 1, ν > 2; got ({kappa0}, {kappa1}, {eta}, {nu})"
            )));
        }
        Ok(Self {
            kappa0,
            kappa1,
            eta,
            nu,
        })
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `κ₀ / (1 − κ₁ − η)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.kappa0 / (1.0 - self.kappa1 - self.eta)
    }

    pub fn innovation_model(&self, innovation: Innovation) -> MarginalModel {
        match innovation {
            Innovation::Standardized => MarginalModel::student_t(self.nu),
            Innovation::Raw => MarginalModel::student_t_raw(self.nu),
        }
        .expect("ν > 2 is checked on construction")
    }
}

fn check_finite(returns: &[f64]) -> Result<()> {
    if returns.is_empty() {
        return Err(RiskError::Domain("return series is empty".into()));
    }
    if let Some(i) = returns.iter().position(|x| !x.is_finite()) {
        return Err(RiskError::Data {
            row: i + 1,
            message: format!("return is not finite ({})", returns[i]),
        });
    }
    Ok(())
}

/// `h_0, …, h_n` for `n` returns; the last entry is the one-step-ahead
/// variance. Resuming from `h_k` on `returns[k..]` continues the sequence.
pub fn filter_variance(spec: &GarchSpec, returns: &[f64], h0: f64) -> Result<Vec<f64>> {
    check_finite(returns)?;
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(RiskError::Domain(format!("h0 must be positive, got {h0}")));
    }
    let mut h = Vec::with_capacity(returns.len() + 1);
    h.push(h0);
    let mut prev = h0;
    for &x in returns {
        prev = spec.kappa0 + spec.kappa1 * x * x + spec.eta * prev;
        h.push(prev);
    }
    Ok(h)
}

/// [`filter_variance`] started from the sample variance.
pub fn filter_variance_default(spec: &GarchSpec, returns: &[f64]) -> Result<Vec<f64>> {
    filter_variance(spec, returns, sample_h0(returns)?)
}

fn sample_h0(returns: &[f64]) -> Result<f64> {
    check_finite(returns)?;
    let v = if returns.len() > 1 { variance(returns) } else { 0.0 };
    if v > 0.0 {
        Ok(v)
    } else {
        Err(RiskError::Data {
            row: 1,
            message: "return series has zero variance".into(),
        })
    }
}

fn t_log_constant(nu: f64, innovation: Innovation) -> f64 {
    let spread = match innovation {
        Innovation::Standardized => nu - 2.0,
        Innovation::Raw => nu,
    };
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (std::f64::consts::PI * spread).ln()
}

fn loglik_unchecked(spec: &GarchSpec, returns: &[f64], h0: f64, innovation: Innovation) -> f64 {
    let spread = match innovation {
        Innovation::Standardized => spec.nu - 2.0,
        Innovation::Raw => spec.nu,
    };
    let c = t_log_constant(spec.nu, innovation);
    let power = 0.5 * (spec.nu + 1.0);
    let mut h = h0;
    let mut ll = 0.0;
    for &x in returns {
        ll += c - 0.5 * h.ln() - power * (x * x / (h * spread)).ln_1p();
        h = spec.kappa0 + spec.kappa1 * x * x + spec.eta * h;
    }
    ll
}

/// Student-t log-likelihood of the returns given `h0`.
pub fn loglik(spec: &GarchSpec, returns: &[f64], h0: f64, innovation: Innovation) -> Result<f64> {
    check_finite(returns)?;
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(RiskError::Domain(format!("h0 must be positive, got {h0}")));
    }
    Ok(loglik_unchecked(spec, returns, h0, innovation))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GarchOptions {
    pub innovation: Innovation,
    /// Initial variance; the sample variance when absent.
    pub h0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarchFit {
    pub spec: GarchSpec,
    pub innovation: Innovation,
    pub h0: f64,
    pub loglik: f64,
    /// Log-likelihood at the optimizer's starting point.
    pub start_loglik: f64,
    /// `h_0 … h_n`, one longer than the data.
    pub filtered_h: Vec<f64>,
    pub standardized_residuals: Vec<f64>,
}

impl GarchFit {
    /// Builds the fit record for given parameters without optimizing.
    pub fn from_spec(
        spec: GarchSpec,
        returns: &[f64],
        options: &GarchOptions,
    ) -> Result<Self> {
        let h0 = match options.h0 {
            Some(h) => h,
            None => sample_h0(returns)?,
        };
        let filtered_h = filter_variance(&spec, returns, h0)?;
        let standardized_residuals = returns
            .iter()
            .zip(&filtered_h)
            .map(|(x, h)| x / h.sqrt())
            .collect();
        let ll = loglik_unchecked(&spec, returns, h0, options.innovation);
        Ok(Self {
            spec,
            innovation: options.innovation,
            h0,
            loglik: ll,
            start_loglik: ll,
            filtered_h,
            standardized_residuals,
        })
    }

    pub fn observations(&self) -> usize {
        self.standardized_residuals.len()
    }

    pub fn innovation_model(&self) -> MarginalModel {
        self.spec.innovation_model(self.innovation)
    }

    fn variance_at(&self, t: usize) -> Result<f64> {
        self.filtered_h.get(t).copied().ok_or_else(|| {
            RiskError::Domain(format!(
                "t = {t} is beyond the one-step-ahead index {}",
                self.observations()
            ))
        })
    }

    /// Law of `X_t` given the past: the innovation scaled by `√h_t`.
    pub fn conditional_marginal(&self, t: usize) -> Result<MarginalModel> {
        MarginalModel::location_scale(self.innovation_model(), 0.0, self.variance_at(t)?.sqrt())
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `(ln κ₀, logit(κ₁+η), logit(κ₁/(κ₁+η)), ln(ν−2))` and back.
fn unpack(p: &[f64]) -> Option<GarchSpec> {
    let s = logistic(p[1]);
    let w = logistic(p[2]);
    GarchSpec::new(p[0].exp(), s * w, s * (1.0 - w), 2.0 + p[3].exp()).ok()
}

fn pack(spec: &GarchSpec) -> Vec<f64> {
    let s = spec.kappa1 + spec.eta;
    vec![
        spec.kappa0.ln(),
        logit(s),
        logit(spec.kappa1 / s),
        (spec.nu - 2.0).ln(),
    ]
}

pub fn fit_mle(returns: &[f64]) -> Result<GarchFit> {
    fit_mle_with(returns, &GarchOptions::default())
}

/// Nelder–Mead on the reparameterized likelihood, restarted once from the
/// first optimum.
pub fn fit_mle_with(returns: &[f64], options: &GarchOptions) -> Result<GarchFit> {
    if returns.len() < MIN_FIT_OBS {
        return Err(RiskError::Domain(format!(
            "GARCH fitting needs at least {MIN_FIT_OBS} observations, got {}",
            returns.len()
        )));
    }
    let h0 = match options.h0 {
        Some(h) => h,
        None => sample_h0(returns)?,
    };
    let var = sample_h0(returns)?;
    let start = GarchSpec::new(0.05 * var, 0.05, 0.90, 8.0)?;
    let n = returns.len() as f64;
    let objective = |p: &[f64]| match unpack(p) {
        Some(spec) => -loglik_unchecked(&spec, returns, h0, options.innovation) / n,
        None => f64::INFINITY,
    };
    let x0 = pack(&start);
    let first = minimize_simplex(objective, &x0, &[0.5, 0.5, 0.5, 0.5], 4000)?;
    let second = minimize_simplex(objective, &first.x, &[0.1, 0.1, 0.1, 0.1], 4000)?;
    let best = if second.value <= first.value { second } else { first };
    let spec = unpack(&best.x)
        .filter(|_| best.value.is_finite())
        .ok_or_else(|| RiskError::Fit("likelihood is not finite at the optimum".into()))?;
    let mut fit = GarchFit::from_spec(spec, returns, &GarchOptions { h0: Some(h0), ..*options })?;
    fit.start_loglik = loglik_unchecked(&start, returns, h0, options.innovation);
    Ok(fit)
}

/// `Q_t(p) = √h_t · q_ε(p)`, for `t` up to the one-step-ahead index.
pub fn conditional_quantile(fit: &GarchFit, t: usize, p: f64) -> Result<f64> {
    fit.conditional_marginal(t)?.quantile(p)
}

/// DCoVaR of `S_t` given `Y_t` with conditional t marginals at time `t`.
pub fn dcovar_forecast(
    fit_s: &GarchFit,
    fit_y: &GarchFit,
    copula: &CopulaModel,
    levels: &RiskLevels,
    t: usize,
) -> Result<f64> {
    if fit_s.observations() != fit_y.observations() {
        return Err(RiskError::Domain(format!(
            "fits cover {} and {} observations",
            fit_s.observations(),
            fit_y.observations()
        )));
    }
    let pair = DependentPair::new(
        fit_s.conditional_marginal(t)?,
        fit_y.conditional_marginal(t)?,
        *copula,
    );
    dcovar_copula(&pair, levels)
}

/// Simulates `n` returns after discarding `burn` from the stationary start.
pub fn simulate<R: RngCore + ?Sized>(
    spec: &GarchSpec,
    innovation: Innovation,
    n: usize,
    burn: usize,
    rng: &mut R,
) -> Vec<f64> {
    let t = StudentT::new(spec.nu).expect("ν > 2");
    let scale = match innovation {
        Innovation::Standardized => ((spec.nu - 2.0) / spec.nu).sqrt(),
        Innovation::Raw => 1.0,
    };
    let mut h = spec.unconditional_variance();
    let mut out = Vec::with_capacity(n);
    for i in 0..n + burn {
        let x = scale * t.sample(rng) * h.sqrt();
        if i >= burn {
            out.push(x);
        }
        h = spec.kappa0 + spec.kappa1 * x * x + spec.eta * h;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BacktestOptions {
    pub innovation: Innovation,
    /// Refit GARCH and copula on all data seen so far every `k` steps.
    pub refit_every: Option<usize>,
    /// Use this copula parameter instead of fitting it.
    pub fixed_theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestCell {
    pub alpha: f64,
    pub delta: f64,
    pub a: f64,
    pub d: f64,
    pub joint_sig: f64,
    pub violations: usize,
    pub violations_pct: f64,
    pub mean_dcovar: f64,
    /// One forecast per out-of-sample day.
    #[serde(skip)]
    pub forecasts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestReport {
    pub copula: String,
    pub theta: f64,
    pub copula_loglik: f64,
    pub garch_s: GarchSpec,
    pub garch_y: GarchSpec,
    pub in_sample: usize,
    pub out_of_sample: usize,
    pub refits: usize,
    pub cells: Vec<BacktestCell>,
}

/// Models frozen at one fitting origin.
struct Frozen {
    h_s: Vec<f64>,
    h_y: Vec<f64>,
    copula: CopulaModel,
    copula_loglik: f64,
    garch_s: GarchSpec,
    garch_y: GarchSpec,
    /// DCoVaR of the unit-scale innovations, per cell.
    base: Vec<f64>,
    /// Associate band in innovation units, per cell.
    y_band: Vec<(f64, f64)>,
}

fn innovation_quantile(m: &MarginalModel, p: f64) -> Result<f64> {
    if p <= 0.0 {
        Ok(f64::NEG_INFINITY)
    } else if p >= 1.0 {
        Ok(f64::INFINITY)
    } else {
        m.quantile(p)
    }
}

fn freeze(
    s: &[f64],
    y: &[f64],
    origin: usize,
    family: CopulaFamily,
    levels: &[RiskLevels],
    options: &BacktestOptions,
) -> Result<Frozen> {
    let garch_opts = GarchOptions {
        innovation: options.innovation,
        h0: None,
    };
    let fs = fit_mle_with(&s[..origin], &garch_opts)?;
    let fy = fit_mle_with(&y[..origin], &garch_opts)?;
    let pseudo = pseudo_observations(&fs.standardized_residuals, &fy.standardized_residuals)?;
    let cfit = match options.fixed_theta {
        Some(theta) => {
            let model = CopulaModel::new(family, theta)?;
            CopulaFit {
                log_likelihood: model.log_likelihood(&pseudo),
                n: pseudo.len(),
                model,
            }
        }
        None => fit_copula(family, &pseudo)?,
    };
    let innovation_s = fs.innovation_model();
    let innovation_y = fy.innovation_model();
    let unit = DependentPair::new(innovation_s.clone(), innovation_y.clone(), cfit.model);
    let base = levels
        .iter()
        .map(|l| dcovar_copula(&unit, l))
        .collect::<Result<Vec<_>>>()?;
    let y_band = levels
        .iter()
        .map(|l| {
            let (lo, hi) = l.associate_band();
            Ok((innovation_quantile(&innovation_y, lo)?, innovation_quantile(&innovation_y, hi)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Frozen {
        h_s: filter_variance(&fs.spec, s, fs.h0)?,
        h_y: filter_variance(&fy.spec, y, fy.h0)?,
        copula: cfit.model,
        copula_loglik: cfit.log_likelihood,
        garch_s: fs.spec,
        garch_y: fy.spec,
        base,
        y_band,
    })
}

/// Fits on the first `in_sample` losses and forecasts DCoVaR for every
/// later day. By scale equivariance the forecast is `√h^S_t` times the
/// DCoVaR of the innovations. A violation is a day with `Y_t` in its band
/// and `S_t` at or beyond the forecast: `≤` in the lower tail, `≥` in the
/// upper.
pub fn rolling_backtest(
    returns_s: &[f64],
    returns_y: &[f64],
    family: CopulaFamily,
    levels: &[RiskLevels],
    in_sample: usize,
    options: &BacktestOptions,
) -> Result<BacktestReport> {
    if returns_s.len() != returns_y.len() {
        return Err(RiskError::Domain(format!(
            "series lengths differ: {} and {}",
            returns_s.len(),
            returns_y.len()
        )));
    }
    if in_sample >= returns_s.len() {
        return Err(RiskError::Domain(format!(
            "in-sample size {in_sample} leaves no out-of-sample data in {} points",
            returns_s.len()
        )));
    }
    if levels.is_empty() {
        return Err(RiskError::Domain("levels grid is empty".into()));
    }
    if options.refit_every == Some(0) {
        return Err(RiskError::Domain("refit interval must be positive".into()));
    }
    check_finite(returns_s)?;
    check_finite(returns_y)?;

    let n = returns_s.len();
    let first = freeze(returns_s, returns_y, in_sample, family, levels, options)?;
    let joint = levels
        .iter()
        .map(|l| joint_significance(&first.copula, l))
        .collect::<Result<Vec<_>>>()?;
    let (copula, copula_loglik, garch_s, garch_y) =
        (first.copula, first.copula_loglik, first.garch_s, first.garch_y);

    let mut frozen = first;
    let mut refits = 0;
    let mut forecasts = vec![Vec::with_capacity(n - in_sample); levels.len()];
    let mut violations = vec![0usize; levels.len()];
    for t in in_sample..n {
        if let Some(k) = options.refit_every {
            if t > in_sample && (t - in_sample) % k == 0 {
                frozen = freeze(returns_s, returns_y, t, family, levels, options)?;
                refits += 1;
            }
        }
        let sd_s = frozen.h_s[t].sqrt();
        let sd_y = frozen.h_y[t].sqrt();
        for (i, l) in levels.iter().enumerate() {
            let forecast = sd_s * frozen.base[i];
            forecasts[i].push(forecast);
            let (lo, hi) = frozen.y_band[i];
            let y = returns_y[t];
            let in_band = y >= sd_y * lo && y <= sd_y * hi;
            let beyond = match l.tail() {
                Tail::Lower => returns_s[t] <= forecast,
                Tail::Upper => returns_s[t] >= forecast,
            };
            if in_band && beyond {
                violations[i] += 1;
            }
        }
    }
    let out = n - in_sample;
    let cells = levels
        .iter()
        .zip(forecasts)
        .enumerate()
        .map(|(i, (l, f))| BacktestCell {
            alpha: l.alpha(),
            delta: l.delta(),
            a: l.a(),
            d: l.d(),
            joint_sig: joint[i],
            violations: violations[i],
            violations_pct: violations[i] as f64 / out as f64,
            mean_dcovar: f.iter().sum::<f64>() / out as f64,
            forecasts: f,
        })
        .collect();
    Ok(BacktestReport {
        copula: family.name().to_string(),
        theta: copula.theta(),
        copula_loglik,
        garch_s,
        garch_y,
        in_sample,
        out_of_sample: out,
        refits,
        cells,
    })
}

/// The four lower-tail cells of the empirical table, `a = d = 0`.
pub fn table5_levels() -> Vec<RiskLevels> {
    [(0.10, 0.10), (0.15, 0.15), (0.10, 0.15), (0.15, 0.10)]
        .iter()
        .map(|&(alpha, delta)| RiskLevels::lower(alpha, 0.0, delta, 0.0).expect("valid levels"))
        .collect()
}

pub const BACKTEST_CSV_KIND: &str = "backtest";
pub const BACKTEST_CSV_HEADER: [&str; 14] = [
    "copula",
    "theta",
    "alpha",
    "delta",
    "a",
    "d",
    "joint_sig_pct",
    "violations",
    "violations_pct",
    "mean_dcovar",
    "in_sample",
    "out_of_sample",
    "joint_sig",
    "violations_rate",
];

impl BacktestReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|c| {
                vec![
                    self.copula.clone(),
                    full(self.theta),
                    full(c.alpha),
                    full(c.delta),
                    full(c.a),
                    full(c.d),
                    pct2(c.joint_sig),
                    c.violations.to_string(),
                    pct2(c.violations_pct),
                    full(c.mean_dcovar),
                    self.in_sample.to_string(),
                    self.out_of_sample.to_string(),
                    full(c.joint_sig),
                    full(c.violations_pct),
                ]
            })
            .collect();
        write_versioned_csv(out, BACKTEST_CSV_KIND, &BACKTEST_CSV_HEADER, &rows)
    }

    /// Per-day forecasts, one column per cell.
    pub fn write_forecasts_csv<W: Write>(&self, out: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain(
                self.cells
                    .iter()
                    .map(|c| format!("dcovar_{}_{}", c.alpha, c.delta)),
            )
            .collect();
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = (0..self.out_of_sample)
            .map(|k| {
                std::iter::once((self.in_sample + k).to_string())
                    .chain(self.cells.iter().map(|c| full(c.forecasts[k])))
                    .collect()
            })
            .collect();
        write_versioned_csv(out, "forecasts", &header_refs, &rows)
    }
}
