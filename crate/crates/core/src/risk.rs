//! VaR, CoVaR, MCoVaR, CCoVaR and DCoVaR.
//!
//! DCoVaR is evaluated three ways that must agree:
//!
//! * [`dcovar_copula`]: loss space, `∫∫ s c(F(s), G(y)) f(s) g(y)` over the
//!   quantile box divided by the copula rectangle mass (the reference path);
//! * [`dcovar_quantile_form`]: probability space, `∫∫ Q_S(u) c(u, v)` over
//!   the level box;
//! * [`dcovar_joint_density`]: a user-supplied joint density.
//!
//! The FGM and aggregate-Pareto closed forms are evaluated exactly as
//! published and compared against the quadrature path by [`audit_fgm_closed`]
//! and [`audit_aggregate_closed`].

use rand::RngCore;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;
use statrs::function::beta::{beta_reg, ln_beta};

use crate::copula::{CopulaFamily, CopulaModel};
use crate::dist::{Marginal, MarginalModel};
use crate::error::{Result, RiskError};
use crate::numerics::{brent, integrate_1d, integrate_2d, QuadratureSpec, Rect};

/// Rectangles with less copula mass than this are treated as empty.
pub const MIN_REGION_MASS: f64 = 1e-14;

/// Relative deviation above which a closed form is flagged by the audit.
pub const AUDIT_FLAG_THRESHOLD: f64 = 1e-4;

/// Which end of the loss distribution the conditioning bands sit in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// Bands `[α, α₁]` and `[δ, δ₁]`.
    Upper,
    /// Mirrored bands `[α - α^(a+1), α]` and `[δ - δ^(d+1), δ]`.
    Lower,
}

/// Confidence levels `(α, a, δ, d)` and the bands they induce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskLevels {
    alpha: f64,
    a: f64,
    delta: f64,
    d: f64,
    tail: Tail,
}

fn check_level(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(RiskError::Domain(format!("{name} must lie in (0, 1), got {p}")))
    }
}

fn check_exponent(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(RiskError::Domain(format!("{name} must be a finite non-negative real, got {x}")))
    }
}

fn upper_end(p: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (p + (1.0 - p).powf(k + 1.0)).min(1.0)
    }
}

fn lower_end(p: f64, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        (p - p.powf(k + 1.0)).max(0.0)
    }
}

impl RiskLevels {
    pub fn new(alpha: f64, a: f64, delta: f64, d: f64) -> Result<Self> {
        Self::with_tail(alpha, a, delta, d, Tail::Upper)
    }

    pub fn lower(alpha: f64, a: f64, delta: f64, d: f64) -> Result<Self> {
        Self::with_tail(alpha, a, delta, d, Tail::Lower)
    }

    pub fn with_tail(alpha: f64, a: f64, delta: f64, d: f64, tail: Tail) -> Result<Self> {
        check_level("alpha", alpha)?;
        check_level("delta", delta)?;
        check_exponent("a", a)?;
        check_exponent("d", d)?;
        Ok(Self {
            alpha,
            a,
            delta,
            d,
            tail,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// `α₁ = α + (1-α)^(a+1)`; exactly 1 when `a = 0`.
    pub fn alpha1(&self) -> f64 {
        upper_end(self.alpha, self.a)
    }

    /// `δ₁ = δ + (1-δ)^(d+1)`; exactly 1 when `d = 0`.
    pub fn delta1(&self) -> f64 {
        upper_end(self.delta, self.d)
    }

    /// Probability band of the target.
    pub fn target_band(&self) -> (f64, f64) {
        match self.tail {
            Tail::Upper => (self.alpha, self.alpha1()),
            Tail::Lower => (lower_end(self.alpha, self.a), self.alpha),
        }
    }

    /// Probability band of the associate.
    pub fn associate_band(&self) -> (f64, f64) {
        match self.tail {
            Tail::Upper => (self.delta, self.delta1()),
            Tail::Lower => (lower_end(self.delta, self.d), self.delta),
        }
    }
}

/// `N` exchangeable Lomax losses with joint density
/// `Γ(γ+N) / (Γ(γ) β^N) · (1 + Σxᵢ/β)^-(γ+N)`, summarised by `S_N = ΣXᵢ`.
///
/// Equivalently `Xᵢ | Λ` are iid exponential with rate `Λ` and
/// `Λ ~ Gamma(shape γ, rate β)`, so `S_N / β` is beta-prime `(N, γ)` and
/// `F(s) = I_{s/(s+β)}(N, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateParetoModel {
    n: u32,
    gamma: f64,
    beta: f64,
}

impl AggregateParetoModel {
    pub fn new(n: u32, gamma: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(RiskError::ParameterDomain("N must be at least 1".into()));
        }
        for (name, v) in [("gamma", gamma), ("beta", beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(RiskError::ParameterDomain(format!(
                    "{name} must be a positive real, got {v}"
                )));
            }
        }
        Ok(Self { n, gamma, beta })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Joint density of `(X₁, …, X_N)`.
    pub fn joint_pdf(&self, xs: &[f64]) -> f64 {
        if xs.len() != self.n as usize || xs.iter().any(|&x| x < 0.0) {
            return 0.0;
        }
        let n = self.n as f64;
        let total: f64 = xs.iter().sum();
        let ln = statrs::function::gamma::ln_gamma(self.gamma + n)
            - statrs::function::gamma::ln_gamma(self.gamma)
            - n * self.beta.ln()
            - (self.gamma + n) * (total / self.beta).ln_1p();
        ln.exp()
    }

    /// `P(S_N > s)` computed without cancellation.
    pub fn survival(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        if s == f64::INFINITY {
            return 0.0;
        }
        beta_reg(self.gamma, self.n as f64, self.beta / (s + self.beta))
    }

    /// Draws `Λ ~ Gamma(γ, rate β)` and then `S_N | Λ ~ Gamma(N, rate Λ)`.
    pub fn sample_mixture<R: RngCore + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let mixing = Gamma::new(self.gamma, 1.0 / self.beta).expect("validated parameters");
        let lambda: f64 = mixing.sample(rng);
        let conditional = Gamma::new(self.n as f64, 1.0 / lambda).unwrap_or_else(|_| {
            // Λ underflowed to zero; the draw is effectively unbounded
            Gamma::new(self.n as f64, f64::MAX).expect("finite scale")
        });
        (lambda, conditional.sample(rng))
    }
}

impl AggregateParetoModel {
    /// Root of `F(s) = p`, or of `1 − F(s) = q` in the upper half.
    fn solve_quantile(&self, p: f64, q: f64) -> Result<f64> {
        let f = |s: f64| {
            if p < 0.5 {
                self.cdf(s) - p
            } else {
                q - self.survival(s)
            }
        };
        let mut hi = self.beta;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(RiskError::Domain(format!("cannot bracket quantile {p}")));
            }
        }
        brent(f, 0.0, hi, 0.0).map(|r| r.x)
    }
}

impl Marginal for AggregateParetoModel {
    fn pdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return if s == 0.0 && self.n == 1 {
                self.gamma / self.beta
            } else {
                0.0
            };
        }
        let n = self.n as f64;
        let ln = (n - 1.0) * s.ln() + self.gamma * self.beta.ln()
            - ln_beta(n, self.gamma)
            - (n + self.gamma) * (s + self.beta).ln();
        ln.exp()
    }

    fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s == f64::INFINITY {
            return 1.0;
        }
        beta_reg(self.n as f64, self.gamma, s / (s + self.beta))
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_level("probability", p)?;
        self.solve_quantile(p, 1.0 - p)
    }

    fn upper_quantile(&self, q: f64) -> Result<f64> {
        check_level("probability", q)?;
        self.solve_quantile(1.0 - q, q)
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn has_finite_upper_mean(&self) -> bool {
        self.gamma > 1.0
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_mixture(rng).1).collect()
    }

    fn describe(&self) -> String {
        format!(
            "AggregateLomax(N={}, gamma={}, beta={})",
            self.n, self.gamma, self.beta
        )
    }
}

/// A loss law usable as target or associate.
#[derive(Debug, Clone, PartialEq)]
pub enum LossModel {
    Marginal(MarginalModel),
    Aggregate(AggregateParetoModel),
}

impl From<MarginalModel> for LossModel {
    fn from(m: MarginalModel) -> Self {
        LossModel::Marginal(m)
    }
}

impl From<AggregateParetoModel> for LossModel {
    fn from(m: AggregateParetoModel) -> Self {
        LossModel::Aggregate(m)
    }
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            LossModel::Marginal($m) => $e,
            LossModel::Aggregate($m) => $e,
        }
    };
}

impl Marginal for LossModel {
    fn pdf(&self, x: f64) -> f64 {
        delegate!(self, m => m.pdf(x))
    }

    fn cdf(&self, x: f64) -> f64 {
        delegate!(self, m => m.cdf(x))
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        delegate!(self, m => m.quantile(p))
    }

    fn upper_quantile(&self, p: f64) -> Result<f64> {
        delegate!(self, m => m.upper_quantile(p))
    }

    fn support(&self) -> (f64, f64) {
        delegate!(self, m => m.support())
    }

    fn has_finite_upper_mean(&self) -> bool {
        delegate!(self, m => m.has_finite_upper_mean())
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        delegate!(self, m => m.sample(rng, n))
    }

    fn describe(&self) -> String {
        delegate!(self, m => m.describe())
    }
}

/// Target loss `S`, associate loss `Y` and the copula coupling them.
#[derive(Debug, Clone, PartialEq)]
pub struct DependentPair {
    pub target: LossModel,
    pub associate: LossModel,
    pub copula: CopulaModel,
}

impl DependentPair {
    pub fn new(
        target: impl Into<LossModel>,
        associate: impl Into<LossModel>,
        copula: CopulaModel,
    ) -> Self {
        Self {
            target: target.into(),
            associate: associate.into(),
            copula,
        }
    }
}

/// Quantile with the convention `Q(0) = inf support`, `Q(1) = sup support`.
fn band_quantile<M: Marginal>(m: &M, p: f64) -> Result<f64> {
    if p <= 0.0 {
        Ok(m.support().0)
    } else if p >= 1.0 {
        Ok(m.support().1)
    } else {
        m.quantile(p)
    }
}

fn require_finite_tail<M: Marginal>(m: &M, upper_p: f64) -> Result<()> {
    if upper_p >= 1.0 && !m.has_finite_upper_mean() {
        return Err(RiskError::InfiniteMean(m.describe()));
    }
    Ok(())
}

/// Loss-space box `[Q_S(lo), Q_S(hi)] × [Q_Y(lo), Q_Y(hi)]` for the levels.
pub fn quantile_box(pair: &DependentPair, levels: &RiskLevels) -> Result<Rect> {
    let (sl, sh) = levels.target_band();
    let (yl, yh) = levels.associate_band();
    Ok(Rect::new(
        band_quantile(&pair.target, sl)?,
        band_quantile(&pair.target, sh)?,
        band_quantile(&pair.associate, yl)?,
        band_quantile(&pair.associate, yh)?,
    ))
}

/// `VaR_α = Q_α`.
pub fn var<M: Marginal>(m: &M, alpha: f64) -> Result<f64> {
    m.quantile(alpha)
}

/// `E[S | Q(lo) ≤ S ≤ Q(hi)]` for a probability band `[lo, hi]`.
pub fn truncated_mean<M: Marginal>(m: &M, lo: f64, hi: f64) -> Result<f64> {
    truncated_mean_with(m, lo, hi, &QuadratureSpec::default())
}

pub fn truncated_mean_with<M: Marginal>(
    m: &M,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(0.0..1.0).contains(&lo) || !(lo < hi && hi <= 1.0) {
        return Err(RiskError::Domain(format!(
            "probability band [{lo}, {hi}] must satisfy 0 ≤ lo < hi ≤ 1"
        )));
    }
    require_finite_tail(m, hi)?;
    let q_lo = band_quantile(m, lo)?;
    let q_hi = band_quantile(m, hi)?;
    let integral = integrate_1d(|s| s * m.pdf(s), q_lo, q_hi, spec)?;
    Ok(integral / (hi - lo))
}

/// `CoVaR_α = E[S | S ≥ Q_α]`.
pub fn covar<M: Marginal>(m: &M, alpha: f64) -> Result<f64> {
    check_level("alpha", alpha)?;
    truncated_mean(m, alpha, 1.0)
}

/// `MCoVaR = E[S | Q_α ≤ S ≤ Q_α₁]`.
pub fn mcovar<M: Marginal>(m: &M, alpha: f64, a: f64) -> Result<f64> {
    check_level("alpha", alpha)?;
    check_exponent("a", a)?;
    truncated_mean(m, alpha, upper_end(alpha, a))
}

/// `CCoVaR = E[S | S ≥ Q_α, Y ≥ Q_δ]`.
pub fn ccovar(pair: &DependentPair, alpha: f64, delta: f64) -> Result<f64> {
    ccovar_with(pair, alpha, delta, &QuadratureSpec::default())
}

pub fn ccovar_with(
    pair: &DependentPair,
    alpha: f64,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_level("alpha", alpha)?;
    check_level("delta", delta)?;
    require_finite_tail(&pair.target, 1.0)?;
    let mass = pair.copula.rectangle_mass(alpha, 1.0, delta, 1.0)?;
    if mass < MIN_REGION_MASS {
        return Err(RiskError::DegenerateRegion { mass });
    }
    // E[S 1{U ≥ α, V ≥ δ}] = ∫_α^1 Q_S(u) (1 − h(u, δ)) du, with the tail
    // probability 1 − u = (1 − α) t⁴ as the variable
    let w = 1.0 - alpha;
    let failure = std::cell::RefCell::new(None);
    let integrand = |t: f64| {
        let p = w * t.powi(4);
        if p <= 0.0 {
            return 0.0;
        }
        match pair.target.upper_quantile(p) {
            Ok(q) => q * (1.0 - pair.copula.h(1.0 - p, delta)) * 4.0 * w * t.powi(3),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let numerator = integrate_1d(integrand, 0.0, 1.0, spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(numerator? / mass)
}

fn joint_integrand(pair: &DependentPair, s: f64, y: f64) -> f64 {
    let fs = pair.target.pdf(s);
    let gy = pair.associate.pdf(y);
    if fs == 0.0 || gy == 0.0 {
        return 0.0;
    }
    pair.copula
        .density_unchecked(pair.target.cdf(s), pair.associate.cdf(y))
        * fs
        * gy
}

/// Probability that both losses fall in their bands.
pub fn joint_significance(copula: &CopulaModel, levels: &RiskLevels) -> Result<f64> {
    let (sl, sh) = levels.target_band();
    let (yl, yh) = levels.associate_band();
    copula.rectangle_mass(sl, sh, yl, yh)
}

fn region_mass(pair: &DependentPair, levels: &RiskLevels) -> Result<f64> {
    let mass = joint_significance(&pair.copula, levels)?;
    if mass < MIN_REGION_MASS {
        return Err(RiskError::DegenerateRegion { mass });
    }
    Ok(mass)
}

/// DCoVaR by loss-space quadrature over the quantile box.
pub fn dcovar_copula(pair: &DependentPair, levels: &RiskLevels) -> Result<f64> {
    dcovar_copula_with(pair, levels, &QuadratureSpec::default())
}

pub fn dcovar_copula_with(
    pair: &DependentPair,
    levels: &RiskLevels,
    spec: &QuadratureSpec,
) -> Result<f64> {
    require_finite_tail(&pair.target, levels.target_band().1)?;
    let mass = region_mass(pair, levels)?;
    let rect = quantile_box(pair, levels)?;
    let scaled = |s: f64, y: f64| s * joint_integrand(pair, s, y) / mass;
    integrate_2d(scaled, rect, spec)
}

/// Maps `r ∈ [0, 1]` onto a probability band, clustering nodes at an open
/// end (0 or 1) where quantiles diverge. Returns `(point, jacobian)`.
fn band_map(lo: f64, hi: f64) -> impl Fn(f64) -> (f64, f64) {
    move |r: f64| {
        if hi >= 1.0 && lo > 0.0 {
            let t = 1.0 - r;
            let w = 1.0 - lo;
            (1.0 - w * t.powi(4), 4.0 * w * t.powi(3))
        } else if lo <= 0.0 && hi < 1.0 {
            (hi * r.powi(4), 4.0 * hi * r.powi(3))
        } else {
            (lo + (hi - lo) * r, hi - lo)
        }
    }
}

/// DCoVaR by probability-space quadrature of `Q_S(u) c(u, v)`.
pub fn dcovar_quantile_form(pair: &DependentPair, levels: &RiskLevels) -> Result<f64> {
    dcovar_quantile_form_with(pair, levels, &QuadratureSpec::default())
}

pub fn dcovar_quantile_form_with(
    pair: &DependentPair,
    levels: &RiskLevels,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (sl, sh) = levels.target_band();
    let (yl, yh) = levels.associate_band();
    require_finite_tail(&pair.target, sh)?;
    let mass = region_mass(pair, levels)?;
    let u_map = band_map(sl, sh);
    let v_map = band_map(yl, yh);
    let inner_spec = spec.tightened(10.0);
    let failure = std::cell::RefCell::new(None);
    let outer = |r: f64| {
        let (u, du) = u_map(r);
        if du == 0.0 || u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let q = match pair.target.quantile(u) {
            Ok(q) => q,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return f64::NAN;
            }
        };
        let inner = integrate_1d(
            |t| {
                let (v, dv) = v_map(t);
                pair.copula.density_unchecked(u, v) * dv
            },
            0.0,
            1.0,
            &inner_spec,
        );
        match inner {
            Ok(m) => q * m * du / mass,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate_1d(outer, 0.0, 1.0, spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result
}

/// DCoVaR from a joint density of `(S, Y)` over a loss-space box:
/// `∫∫ s f(s, y) / ∫∫ f(s, y)`.
pub fn dcovar_joint_density<F: Fn(f64, f64) -> f64>(joint_pdf: F, bounds: Rect) -> Result<f64> {
    dcovar_joint_density_with(joint_pdf, bounds, &QuadratureSpec::default())
}

pub fn dcovar_joint_density_with<F: Fn(f64, f64) -> f64>(
    joint_pdf: F,
    bounds: Rect,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mass = integrate_2d(&joint_pdf, bounds, spec)?;
    if !(mass >= MIN_REGION_MASS) {
        return Err(RiskError::DegenerateRegion { mass });
    }
    let numerator = integrate_2d(|s, y| s * joint_pdf(s, y), bounds, spec)?;
    Ok(numerator / mass)
}

fn fgm_mass(theta: f64, levels: &RiskLevels) -> f64 {
    let c = |u: f64, v: f64| u * v + theta * u * v * (1.0 - u) * (1.0 - v);
    let (al, a1, de, d1) = (levels.alpha, levels.alpha1(), levels.delta, levels.delta1());
    c(a1, d1) - c(al, d1) - c(a1, de) + c(al, de)
}

/// Published FGM / unit-shape Lomax closed form, obtained by integrating the
/// loss-space representation. Evaluated verbatim, including the exponent
/// `α` inside its second logarithm.
pub fn dcovar_fgm_closed(beta1: f64, theta: f64, levels: &RiskLevels) -> f64 {
    let (al, a1, de, d1) = (levels.alpha, levels.alpha1(), levels.delta, levels.delta1());
    let k = 1.0 - d1 - de;
    let log_a = (1.0 - (1.0 - al).powf(levels.a)).ln();
    let first = (a1 - al - log_a) * (1.0 + theta * k);
    let second = theta
        * k
        * (al * (al - 2.0) - a1 * (a1 - 2.0) - 0.5 * (1.0 - (1.0 - al).powf(al)).ln());
    beta1 * (d1 - de) / fgm_mass(theta, levels) * (first - second)
}

/// Published FGM / unit-shape Lomax closed form obtained through the
/// quantile representation. Evaluated verbatim.
pub fn dcovar_fgm_closed_quantile(beta1: f64, theta: f64, levels: &RiskLevels) -> f64 {
    let (al, a1, de, d1) = (levels.alpha, levels.alpha1(), levels.delta, levels.delta1());
    let k = 1.0 - d1 - de;
    let log_a = (1.0 - (1.0 - al).powf(levels.a)).ln();
    let body = log_a * (theta * k - 1.0) - (theta * (1.0 + a1 - al) * k - 1.0) * (a1 - al);
    beta1 * (d1 - de) / fgm_mass(theta, levels) * body
}

/// How the aggregate closed form treats its leading logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregateVariant {
    /// `ln((1-α^{1/N}) / (1-α^{1/N}))` exactly as printed, i.e. zero.
    Literal,
    /// `ln((1-α^{1/N}) / (1-α₁^{1/N}))`.
    RepairedLog,
}

/// Published closed form for `S_N` of the aggregate Pareto model under an
/// FGM copula, with the even/odd-`N` sign pattern. Elided trailing terms are
/// taken as zero. At `N = 1` the `N/(N-1)` bracket is replaced by its limit
/// `ln(x/y)`.
pub fn dcovar_aggregate_closed(
    model: &AggregateParetoModel,
    theta: f64,
    levels: &RiskLevels,
    variant: AggregateVariant,
) -> f64 {
    let n = model.n as f64;
    let (al, a1, de, d1) = (levels.alpha, levels.alpha1(), levels.delta, levels.delta1());
    let x = 1.0 - al.powf(1.0 / n);
    let y = 1.0 - a1.powf(1.0 / n);
    let log_term = match variant {
        AggregateVariant::Literal => 0.0,
        AggregateVariant::RepairedLog => (x / y).ln(),
    };
    let shared = log_term + n * (al.powf(1.0 / n) - a1.powf(1.0 / n));
    let sign = if model.n % 2 == 0 { 1.0 } else { -1.0 };
    let ratio_term = if model.n == 1 {
        (x / y).ln()
    } else {
        n / (n - 1.0) * (x.powf(n - 1.0) - y.powf(n - 1.0))
    };
    let first_bracket = shared + sign * ratio_term - sign * (x.powf(n) - y.powf(n)) / n;
    let second_bracket = shared + 2.0 * n / (2.0 * n - 1.0) * (x.powf(2.0 * n - 1.0) - y.powf(2.0 * n - 1.0))
        - (x.powf(2.0 * n) - y.powf(2.0 * n)) / (2.0 * n);
    let k = 1.0 - d1 - de;
    let body = (d1 - de) * (1.0 + theta * k) * first_bracket + 2.0 * theta * k * second_bracket;
    n * model.gamma * (d1 - de) / fgm_mass(theta, levels) * body
}

/// One row of the closed-form audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormAudit {
    pub formula: String,
    pub n: u32,
    pub gamma: f64,
    pub beta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub a: f64,
    pub delta: f64,
    pub d: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub flagged: bool,
}

impl ClosedFormAudit {
    #[allow(clippy::too_many_arguments)]
    fn new(
        formula: &str,
        model: &AggregateParetoModel,
        theta: f64,
        levels: &RiskLevels,
        closed_form: f64,
        oracle: f64,
    ) -> Self {
        let abs_deviation = (closed_form - oracle).abs();
        let rel_deviation = abs_deviation / oracle.abs().max(f64::MIN_POSITIVE);
        let flagged = !closed_form.is_finite() || !(rel_deviation <= AUDIT_FLAG_THRESHOLD);
        Self {
            formula: formula.to_string(),
            n: model.n,
            gamma: model.gamma,
            beta: model.beta,
            theta,
            alpha: levels.alpha,
            a: levels.a,
            delta: levels.delta,
            d: levels.d,
            closed_form,
            oracle,
            abs_deviation,
            rel_deviation,
            flagged,
        }
    }
}

pub const AUDIT_CSV_KIND: &str = "closed-form-audit";
pub const AUDIT_CSV_HEADER: [&str; 15] = [
    "formula",
    "n",
    "gamma",
    "beta",
    "theta",
    "alpha",
    "a",
    "delta",
    "d",
    "closed_form",
    "oracle",
    "abs_deviation",
    "rel_deviation",
    "flag_threshold",
    "flagged",
];

/// Writes audit rows as a versioned CSV.
pub fn write_audit_csv<W: std::io::Write>(out: W, rows: &[ClosedFormAudit]) -> Result<()> {
    use crate::io::{full, write_versioned_csv};
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.formula.clone(),
                r.n.to_string(),
                full(r.gamma),
                full(r.beta),
                full(r.theta),
                full(r.alpha),
                full(r.a),
                full(r.delta),
                full(r.d),
                full(r.closed_form),
                full(r.oracle),
                full(r.abs_deviation),
                full(r.rel_deviation),
                full(AUDIT_FLAG_THRESHOLD),
                r.flagged.to_string(),
            ]
        })
        .collect();
    write_versioned_csv(out, AUDIT_CSV_KIND, &AUDIT_CSV_HEADER, &body)
}

fn fgm_oracle(target: LossModel, theta: f64, levels: &RiskLevels) -> Result<f64> {
    let copula = CopulaModel::new(CopulaFamily::Fgm, theta)?;
    let associate = MarginalModel::pareto(1.0)?;
    dcovar_copula(&DependentPair::new(target, associate, copula), levels)
}

fn require_upper(levels: &RiskLevels) -> Result<()> {
    if levels.tail != Tail::Upper {
        return Err(RiskError::Domain(
            "closed forms are stated for upper-tail levels".into(),
        ));
    }
    Ok(())
}

/// Compares both FGM closed forms with the quadrature path for a
/// `Lomax(β₁, 1)` target.
pub fn audit_fgm_closed(beta1: f64, theta: f64, levels: &RiskLevels) -> Result<Vec<ClosedFormAudit>> {
    require_upper(levels)?;
    let target = MarginalModel::pareto(beta1)?;
    let oracle = fgm_oracle(target.into(), theta, levels)?;
    let model = AggregateParetoModel::new(1, 1.0, beta1)?;
    Ok(vec![
        ClosedFormAudit::new(
            "fgm-direct",
            &model,
            theta,
            levels,
            dcovar_fgm_closed(beta1, theta, levels),
            oracle,
        ),
        ClosedFormAudit::new(
            "fgm-quantile",
            &model,
            theta,
            levels,
            dcovar_fgm_closed_quantile(beta1, theta, levels),
            oracle,
        ),
    ])
}

/// Compares both aggregate closed-form variants with the quadrature path.
pub fn audit_aggregate_closed(
    model: &AggregateParetoModel,
    theta: f64,
    levels: &RiskLevels,
) -> Result<Vec<ClosedFormAudit>> {
    require_upper(levels)?;
    let oracle = fgm_oracle((*model).into(), theta, levels)?;
    Ok([
        ("aggregate-literal", AggregateVariant::Literal),
        ("aggregate-repaired", AggregateVariant::RepairedLog),
    ]
    .into_iter()
    .map(|(label, variant)| {
        ClosedFormAudit::new(
            label,
            model,
            theta,
            levels,
            dcovar_aggregate_closed(model, theta, levels, variant),
            oracle,
        )
    })
    .collect())
}

/// Sample estimate of a conditional mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalEstimate {
    pub value: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Sample DCoVaR: mean of `s` over pairs whose target and associate both
/// fall inside the empirical quantile bands of `levels`.
pub fn empirical_dcovar(pairs: &[(f64, f64)], levels: &RiskLevels) -> Result<EmpiricalEstimate> {
    if pairs.is_empty() {
        return Err(RiskError::Domain("empirical DCoVaR needs data".into()));
    }
    let ss: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let bounds = |xs: &[f64], (lo, hi): (f64, f64)| {
        let l = if lo <= 0.0 {
            f64::NEG_INFINITY
        } else {
            crate::empirical::quantile(xs, lo)
        };
        let h = if hi >= 1.0 {
            f64::INFINITY
        } else {
            crate::empirical::quantile(xs, hi)
        };
        (l, h)
    };
    let (sl, sh) = bounds(&ss, levels.target_band());
    let (yl, yh) = bounds(&ys, levels.associate_band());
    let hits: Vec<f64> = pairs
        .iter()
        .filter(|&&(s, y)| s >= sl && s <= sh && y >= yl && y <= yh)
        .map(|p| p.0)
        .collect();
    if hits.len() < 2 {
        return Err(RiskError::DegenerateRegion {
            mass: hits.len() as f64 / pairs.len() as f64,
        });
    }
    let value = crate::empirical::mean(&hits);
    let std_error = (crate::empirical::variance(&hits) / hits.len() as f64).sqrt();
    Ok(EmpiricalEstimate {
        value,
        std_error,
        count: hits.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lomax(beta: f64) -> MarginalModel {
        MarginalModel::pareto(beta).unwrap()
    }

    fn table_levels(alpha: f64, delta: f64) -> RiskLevels {
        RiskLevels::new(alpha, 0.1, delta, 0.1).unwrap()
    }

    #[test]
    fn derived_levels() {
        let l = table_levels(0.9, 0.95);
        assert!((l.alpha1() - (0.9 + 0.1f64.powf(1.1))).abs() < 1e-15);
        assert!((l.delta1() - (0.95 + 0.05f64.powf(1.1))).abs() < 1e-15);
        let full = RiskLevels::new(0.9, 0.0, 0.37, 0.0).unwrap();
        assert_eq!(full.alpha1(), 1.0);
        assert_eq!(full.delta1(), 1.0);
        let low = RiskLevels::lower(0.1, 0.0, 0.15, 0.0).unwrap();
        assert_eq!(low.target_band(), (0.0, 0.1));
        assert_eq!(low.associate_band(), (0.0, 0.15));
    }

    #[test]
    fn invalid_levels() {
        assert!(RiskLevels::new(1.0, 0.1, 0.9, 0.1).is_err());
        assert!(RiskLevels::new(0.9, -0.1, 0.9, 0.1).is_err());
        assert!(RiskLevels::new(0.9, 0.1, 0.0, 0.1).is_err());
        assert!(RiskLevels::new(0.9, f64::NAN, 0.9, 0.1).is_err());
    }

    #[test]
    fn var_closed_forms() {
        assert!((var(&lomax(1.5), 0.9).unwrap() - 13.5).abs() < 1e-12);
        assert!((var(&lomax(1.5), 0.95).unwrap() - 28.5).abs() < 1e-12);
        assert_eq!(var(&MarginalModel::student_t(5.0).unwrap(), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn covar_of_exponential_is_memoryless() {
        let e = MarginalModel::gamma(1.0, 1.0).unwrap();
        let v = covar(&e, 0.9).unwrap();
        assert!((v - (10f64.ln() + 1.0)).abs() < 1e-7);
    }

    #[test]
    fn unit_shape_lomax_refuses_tail_means() {
        let p = lomax(1.5);
        assert!(matches!(covar(&p, 0.9), Err(RiskError::InfiniteMean(_))));
        assert!(matches!(mcovar(&p, 0.9, 0.0), Err(RiskError::InfiniteMean(_))));
        let pair = DependentPair::new(p.clone(), p.clone(), CopulaModel::independence());
        assert!(matches!(ccovar(&pair, 0.9, 0.9), Err(RiskError::InfiniteMean(_))));
        let levels = RiskLevels::new(0.9, 0.0, 0.9, 0.1).unwrap();
        assert!(matches!(dcovar_copula(&pair, &levels), Err(RiskError::InfiniteMean(_))));
    }

    #[test]
    fn mcovar_is_inside_its_band() {
        let p = lomax(1.5);
        let v = mcovar(&p, 0.9, 0.1).unwrap();
        let hi = p.quantile(0.9 + 0.1f64.powf(1.1)).unwrap();
        assert!(v > 13.5 && v < hi);
    }

    #[test]
    fn mcovar_collapses_to_covar() {
        let p = MarginalModel::pareto_lomax(1.0, 3.0).unwrap();
        let m = mcovar(&p, 0.9, 0.0).unwrap();
        let c = covar(&p, 0.9).unwrap();
        assert!((m - c).abs() < 1e-6);
        // Lomax(1, 3): E[X | X > q] = (q + β) γ/(γ-1) - β
        let q = p.quantile(0.9).unwrap();
        assert!((c - ((q + 1.0) * 1.5 - 1.0)).abs() < 1e-7);
    }

    #[test]
    fn table_one_joint_significance() {
        let c = CopulaModel::new(CopulaFamily::Clayton, 7.0).unwrap();
        let first = joint_significance(&c, &table_levels(0.9, 0.9)).unwrap();
        let last = joint_significance(&c, &table_levels(0.95, 0.95)).unwrap();
        assert!((100.0 * first - 2.79).abs() <= 0.01);
        assert!((100.0 * last - 0.77).abs() <= 0.01);
    }

    #[test]
    fn full_tail_significance_matches_survival_identity() {
        let c = CopulaModel::new(CopulaFamily::Frank, 3.0).unwrap();
        let l = RiskLevels::new(0.9, 0.0, 0.85, 0.0).unwrap();
        let js = joint_significance(&c, &l).unwrap();
        assert!((js - (1.0 - 0.9 - 0.85 + c.cdf(0.9, 0.85))).abs() < 1e-15);
    }

    #[test]
    fn independence_dcovar_is_mcovar() {
        let pair = DependentPair::new(lomax(1.5), lomax(1.5), CopulaModel::independence());
        let l = table_levels(0.9, 0.9);
        let d = dcovar_copula(&pair, &l).unwrap();
        let q = dcovar_quantile_form(&pair, &l).unwrap();
        let m = mcovar(&lomax(1.5), 0.9, 0.1).unwrap();
        assert!((d - m).abs() < 1e-6, "{d} vs {m}");
        assert!((q - m).abs() < 1e-6, "{q} vs {m}");
    }

    #[test]
    fn degenerate_region_is_an_error() {
        let c = CopulaModel::new(CopulaFamily::Clayton, -1.0).unwrap();
        let pair = DependentPair::new(lomax(1.0), lomax(1.0), c);
        // countermonotone: both upper bands cannot be hit together
        let l = RiskLevels::new(0.9, 0.1, 0.9, 0.1).unwrap();
        assert!(matches!(dcovar_copula(&pair, &l), Err(RiskError::DegenerateRegion { .. })));
    }

    #[test]
    fn uniform_joint_density_gives_midpoint() {
        let rect = Rect::new(2.0, 4.0, 1.0, 3.0);
        let pdf = |s: f64, y: f64| if (0.0..=10.0).contains(&s) && (0.0..=10.0).contains(&y) { 0.01 } else { 0.0 };
        let v = dcovar_joint_density(pdf, rect).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_reduces_to_lomax_at_one() {
        let agg = AggregateParetoModel::new(1, 2.5, 1.5).unwrap();
        let lx = MarginalModel::pareto_lomax(1.5, 2.5).unwrap();
        for s in [0.01, 0.5, 3.0, 40.0] {
            assert!((agg.cdf(s) - lx.cdf(s)).abs() < 1e-13);
            assert!((agg.pdf(s) - lx.pdf(s)).abs() < 1e-13);
        }
        assert!((agg.quantile(0.95).unwrap() - lx.quantile(0.95).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn aggregate_quantile_round_trip() {
        let agg = AggregateParetoModel::new(3, 1.2, 0.7).unwrap();
        for p in [1e-4, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-9] {
            let q = agg.quantile(p).unwrap();
            let back = if p < 0.5 { agg.cdf(q) } else { 1.0 - agg.survival(q) };
            assert!((back - p).abs() < 1e-12 * p.max(1.0 - p).max(1e-3), "p = {p}");
        }
    }

    #[test]
    fn aggregate_survival_complements_cdf() {
        let agg = AggregateParetoModel::new(2, 1.0, 1.0).unwrap();
        for s in [0.1, 1.0, 10.0] {
            assert!((agg.cdf(s) + agg.survival(s) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn literal_aggregate_log_vanishes() {
        let m = AggregateParetoModel::new(2, 1.0, 1.0).unwrap();
        let l = table_levels(0.9, 0.9);
        let lit = dcovar_aggregate_closed(&m, 0.3, &l, AggregateVariant::Literal);
        let rep = dcovar_aggregate_closed(&m, 0.3, &l, AggregateVariant::RepairedLog);
        assert!(lit.is_finite() && rep.is_finite());
        assert!((rep - lit).abs() > 1e-6);
    }

    #[test]
    fn closed_form_log_argument_is_positive() {
        for &alpha in &[0.01, 0.5, 0.9, 0.999] {
            for &a in &[0.01, 0.1, 1.0, 5.0] {
                assert!(1.0 - (1.0f64 - alpha).powf(a) > 0.0);
            }
        }
    }

    #[test]
    fn empirical_dcovar_needs_hits() {
        let l = table_levels(0.9, 0.9);
        assert!(empirical_dcovar(&[], &l).is_err());
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, -(i as f64))).collect();
        assert!(empirical_dcovar(&pts, &l).is_err());
    }
}
