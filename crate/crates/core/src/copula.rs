//! Bivariate copulas: FGM, Clayton, Gumbel and Frank.
//!
//! Each family provides its distribution function, density, the conditional
//! distribution `h(u, v) = ∂C/∂u` and its inverse, rectangle masses, sampling
//! and a one-parameter maximum-likelihood fit on pseudo-observations.
//!
//! Frank is evaluated through `expm1`/`ln_1p` forms and the reflection
//! `C_{-θ}(u, v) = u - C_θ(u, 1 - v)`, which keeps large `|θ|` accurate.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::numerics::{brent, exponential, maximize_1d, open_unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Fgm,
    Clayton,
    Gumbel,
    Frank,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 4] = [
        CopulaFamily::Fgm,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
        CopulaFamily::Frank,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CopulaFamily::Fgm => "fgm",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Frank => "frank",
        }
    }

    /// Whether `theta` lies in the family's parameter domain.
    pub fn admits(&self, theta: f64) -> bool {
        if !theta.is_finite() {
            return false;
        }
        match self {
            CopulaFamily::Fgm => (-1.0..=1.0).contains(&theta),
            CopulaFamily::Clayton => theta >= -1.0 && theta != 0.0,
            CopulaFamily::Gumbel => theta >= 1.0,
            CopulaFamily::Frank => theta != 0.0,
        }
    }

    /// Search interval for likelihood maximisation.
    fn fit_bracket(&self) -> (f64, f64) {
        match self {
            CopulaFamily::Fgm => (-1.0, 1.0),
            CopulaFamily::Clayton => (-1.0 + 1e-6, 50.0),
            CopulaFamily::Gumbel => (1.0, 50.0),
            CopulaFamily::Frank => (-50.0, 50.0),
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fgm" => Ok(CopulaFamily::Fgm),
            "clayton" => Ok(CopulaFamily::Clayton),
            "gumbel" => Ok(CopulaFamily::Gumbel),
            "frank" => Ok(CopulaFamily::Frank),
            other => Err(RiskError::Domain(format!("unknown copula family '{other}'"))),
        }
    }
}

/// A copula family with a validated parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaModel {
    family: CopulaFamily,
    theta: f64,
}

// Largest double below one; sampled coordinates are clamped into (0, 1).
const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

fn clamp_open(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, ONE_MINUS)
}

impl CopulaModel {
    pub fn new(family: CopulaFamily, theta: f64) -> Result<Self> {
        if !family.admits(theta) {
            return Err(RiskError::ParameterDomain(format!(
                "theta = {theta} is outside the {family} domain"
            )));
        }
        Ok(Self { family, theta })
    }

    /// FGM with `θ = 0`, i.e. the product copula.
    pub fn independence() -> Self {
        Self {
            family: CopulaFamily::Fgm,
            theta: 0.0,
        }
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        let c = raw_cdf(self.family, self.theta, u, v);
        // Fréchet bounds guard against last-bit rounding
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }

    /// Copula density on the open unit square.
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return Err(RiskError::Domain(format!(
                "copula density needs (u, v) strictly inside the unit square, got ({u}, {v})"
            )));
        }
        Ok(ln_density(self.family, self.theta, u, v).exp())
    }

    /// Density without the boundary check, for use inside integrands.
    pub(crate) fn density_unchecked(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 || v <= 0.0 || v >= 1.0 {
            return 0.0;
        }
        ln_density(self.family, self.theta, u, v).exp()
    }

    /// Conditional distribution `P(V ≤ v | U = u) = ∂C/∂u`.
    pub fn h(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let u = clamp_open(u);
        h_raw(self.family, self.theta, u, v).clamp(0.0, 1.0)
    }

    /// Solves `h(u, v) = w` for `v`.
    pub fn h_inverse(&self, u: f64, w: f64) -> f64 {
        let u = clamp_open(u);
        let w = clamp_open(w);
        let t = self.theta;
        let v = match self.family {
            CopulaFamily::Fgm => {
                let a = t * (1.0 - 2.0 * u);
                if a.abs() < 1e-12 {
                    w
                } else {
                    let b = 1.0 + a;
                    (b - (b * b - 4.0 * a * w).sqrt()) / (2.0 * a)
                }
            }
            CopulaFamily::Clayton if t > 0.0 => {
                // ((w^{-θ/(1+θ)} - 1) u^{-θ} + 1)^{-1/θ}
                let inner = (-t / (1.0 + t) * w.ln()).exp_m1() * (-t * u.ln()).exp();
                (-(inner.ln_1p()) / t).exp()
            }
            CopulaFamily::Frank => frank_h_inverse(t, u, w),
            _ => self.h_inverse_numeric(u, w),
        };
        clamp_open(v)
    }

    fn h_inverse_numeric(&self, u: f64, w: f64) -> f64 {
        let f = |v: f64| h_raw(self.family, self.theta, u, v) - w;
        let (lo, hi) = (f64::MIN_POSITIVE, ONE_MINUS);
        match brent(f, lo, hi, 1e-15) {
            Ok(r) => r.x,
            Err(_) => {
                // h is monotone in v; a missing sign change means w sits in a flat end
                if f(0.5) > 0.0 {
                    lo
                } else {
                    hi
                }
            }
        }
    }

    /// Probability of `[lo_u, hi_u] × [lo_v, hi_v]` by inclusion–exclusion.
    pub fn rectangle_mass(&self, lo_u: f64, hi_u: f64, lo_v: f64, hi_v: f64) -> Result<f64> {
        let ok = |lo: f64, hi: f64| (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi;
        if !ok(lo_u, hi_u) || !ok(lo_v, hi_v) {
            return Err(RiskError::Domain(format!(
                "rectangle [{lo_u}, {hi_u}] × [{lo_v}, {hi_v}] is not inside the unit square"
            )));
        }
        let m = self.cdf(hi_u, hi_v) - self.cdf(lo_u, hi_v) - self.cdf(hi_u, lo_v)
            + self.cdf(lo_u, lo_v);
        Ok(m.max(0.0))
    }

    /// One draw `(u, v)` from the copula.
    ///
    /// Gumbel uses the Marshall–Olkin frailty construction with a positive
    /// stable mixing variable; the other families invert `h`.
    pub fn sample_pair<R: RngCore + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.family {
            CopulaFamily::Gumbel => {
                let alpha = 1.0 / self.theta;
                let e1 = exponential(rng);
                let e2 = exponential(rng);
                if alpha >= 1.0 {
                    return (clamp_open((-e1).exp()), clamp_open((-e2).exp()));
                }
                let s = positive_stable(alpha, rng);
                let u = (-(e1 / s).powf(alpha)).exp();
                let v = (-(e2 / s).powf(alpha)).exp();
                (clamp_open(u), clamp_open(v))
            }
            _ => {
                let u = open_unit(rng);
                let w = open_unit(rng);
                (u, self.h_inverse(u, w))
            }
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<(f64, f64)> {
        (0..n).map(|_| self.sample_pair(rng)).collect()
    }

    pub fn log_likelihood(&self, pseudo_obs: &[(f64, f64)]) -> f64 {
        log_likelihood(self.family, self.theta, pseudo_obs)
    }
}

/// Kanter / Chambers–Mallows–Stuck draw of a positive stable variable with
/// Laplace transform `exp(-t^α)`, `0 < α < 1`.
fn positive_stable<R: RngCore + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let angle = std::f64::consts::PI * open_unit(rng);
    let e = exponential(rng);
    let a = (alpha * angle).sin() / angle.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * angle).sin() / e).powf((1.0 - alpha) / alpha);
    a * b
}

fn clayton_log_a(theta: f64, u: f64, v: f64) -> Option<f64> {
    // ln(u^{-θ} + v^{-θ} - 1); None when the argument is not positive
    let s = (-theta * u.ln()).exp_m1() + (-theta * v.ln()).exp_m1();
    if s <= -1.0 {
        None
    } else {
        Some(s.ln_1p())
    }
}

fn gumbel_parts(theta: f64, u: f64, v: f64) -> (f64, f64, f64) {
    // returns (x, y, ln S) with x = -ln u, y = -ln v, S = x^θ + y^θ
    let x = -u.ln();
    let y = -v.ln();
    let (big, small) = if x >= y { (x, y) } else { (y, x) };
    let ln_s = theta * big.ln() + (small / big).powf(theta).ln_1p();
    (x, y, ln_s)
}

/// Frank `D = e^{-θu} + e^{-θv} - e^{-θ(u+v)} - e^{-θ}` for `θ > 0`.
fn frank_d(theta: f64, u: f64, v: f64) -> f64 {
    let eu = (-theta * u).exp();
    let ev = (-theta * v).exp();
    eu + ev - eu * ev - (-theta).exp()
}

fn frank_h_inverse(t: f64, u: f64, w: f64) -> f64 {
    if t < 0.0 {
        return 1.0 - frank_h_inverse(-t, u, 1.0 - w);
    }
    let eu = (-t * u).exp();
    let denom = w + (1.0 - w) * eu;
    let arg = w * (-t).exp_m1() / denom;
    if arg.abs() < 0.5 {
        -arg.ln_1p() / t
    } else {
        -((w * (-t).exp() + (1.0 - w) * eu).ln() - denom.ln()) / t
    }
}

fn raw_cdf(family: CopulaFamily, t: f64, u: f64, v: f64) -> f64 {
    match family {
        CopulaFamily::Fgm => u * v * (1.0 + t * (1.0 - u) * (1.0 - v)),
        CopulaFamily::Clayton => match clayton_log_a(t, u, v) {
            Some(ln_a) => (-ln_a / t).exp(),
            None => 0.0,
        },
        CopulaFamily::Gumbel => {
            let (_, _, ln_s) = gumbel_parts(t, u, v);
            (-(ln_s / t).exp()).exp()
        }
        CopulaFamily::Frank => {
            if t < 0.0 {
                return u - raw_cdf(family, -t, u, 1.0 - v);
            }
            let g = (-t).exp_m1();
            let ratio = (-t * u).exp_m1() * (-t * v).exp_m1() / g;
            if ratio.abs() < 0.5 {
                -ratio.ln_1p() / t
            } else {
                -(frank_d(t, u, v).ln() - (-g).ln()) / t
            }
        }
    }
}

fn h_raw(family: CopulaFamily, t: f64, u: f64, v: f64) -> f64 {
    match family {
        CopulaFamily::Fgm => v * (1.0 + t * (1.0 - v) * (1.0 - 2.0 * u)),
        CopulaFamily::Clayton => match clayton_log_a(t, u, v) {
            Some(ln_a) => (-(t + 1.0) * u.ln() - (1.0 / t + 1.0) * ln_a).exp(),
            None => 0.0,
        },
        CopulaFamily::Gumbel => {
            let (x, _, ln_s) = gumbel_parts(t, u, v);
            let ln_c = -(ln_s / t).exp();
            (ln_c + (1.0 / t - 1.0) * ln_s + (t - 1.0) * x.ln() - u.ln()).exp()
        }
        CopulaFamily::Frank => {
            if t < 0.0 {
                return 1.0 - h_raw(family, -t, u, 1.0 - v);
            }
            (-t * u).exp() * -(-t * v).exp_m1() / frank_d(t, u, v)
        }
    }
}

/// Log density; `θ = 0` is read as independence so likelihood profiles can
/// cross it.
fn ln_density(family: CopulaFamily, t: f64, u: f64, v: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    match family {
        CopulaFamily::Fgm => (1.0 + t * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)).ln(),
        CopulaFamily::Clayton => {
            if t <= -1.0 {
                return f64::NEG_INFINITY;
            }
            match clayton_log_a(t, u, v) {
                Some(ln_a) => {
                    (1.0 + t).ln() - (1.0 + t) * (u.ln() + v.ln()) - (2.0 + 1.0 / t) * ln_a
                }
                None => f64::NEG_INFINITY,
            }
        }
        CopulaFamily::Gumbel => {
            let (x, y, ln_s) = gumbel_parts(t, u, v);
            let a = (ln_s / t).exp();
            -a + (t - 1.0) * (x.ln() + y.ln()) - u.ln() - v.ln() + (1.0 / t - 2.0) * ln_s
                + (a + t - 1.0).ln()
        }
        CopulaFamily::Frank => {
            if t < 0.0 {
                return ln_density(family, -t, u, 1.0 - v);
            }
            let d = frank_d(t, u, v);
            t.ln() + (-(-t).exp_m1()).ln() - t * (u + v) - 2.0 * d.ln()
        }
    }
}

fn log_likelihood(family: CopulaFamily, theta: f64, obs: &[(f64, f64)]) -> f64 {
    obs.iter()
        .map(|&(u, v)| ln_density(family, theta, u, v))
        .sum()
}

/// Result of [`fit_mle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaFit {
    pub model: CopulaModel,
    pub log_likelihood: f64,
    pub n: usize,
}

/// Maximum-likelihood estimate of `θ` for `family` from pseudo-observations.
///
/// A coarse scan over the family bracket (clipped to `[-50, 50]`) locates the
/// best cell; Brent's golden-section/parabolic search refines it.
pub fn fit_mle(family: CopulaFamily, pseudo_obs: &[(f64, f64)]) -> Result<CopulaFit> {
    if pseudo_obs.len() < 30 {
        return Err(RiskError::Fit(format!(
            "copula fit needs at least 30 pairs, got {}",
            pseudo_obs.len()
        )));
    }
    if pseudo_obs
        .iter()
        .any(|&(u, v)| !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    {
        return Err(RiskError::Fit(
            "pseudo-observations must lie strictly inside the unit square".into(),
        ));
    }
    let first = pseudo_obs[0];
    if pseudo_obs.iter().all(|&p| p == first) {
        return Err(RiskError::Fit("all pseudo-observations are identical".into()));
    }

    let (lo, hi) = family.fit_bracket();
    let ll = |t: f64| {
        let v = log_likelihood(family, t, pseudo_obs);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    const GRID: usize = 100;
    let grid: Vec<f64> = (0..=GRID)
        .map(|k| lo + (hi - lo) * k as f64 / GRID as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| ll(t)).collect();
    let best = (0..=GRID)
        .max_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("grid is non-empty");
    if !values[best].is_finite() {
        return Err(RiskError::Fit(format!(
            "{family} log-likelihood is not finite anywhere on its bracket"
        )));
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(GRID)];
    let (mut theta, mut value) = maximize_1d(ll, a, b, 1e-10);
    if value < values[best] {
        theta = grid[best];
        value = values[best];
    }
    if theta == 0.0 && !family.admits(0.0) {
        // exact independence is not a member of Clayton/Frank; step off it
        theta = 1e-9;
    }
    Ok(CopulaFit {
        model: CopulaModel::new(family, theta)?,
        log_likelihood: value,
        n: pseudo_obs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngContract;

    fn models() -> Vec<CopulaModel> {
        vec![
            CopulaModel::new(CopulaFamily::Fgm, 0.7).unwrap(),
            CopulaModel::new(CopulaFamily::Fgm, -0.6).unwrap(),
            CopulaModel::new(CopulaFamily::Clayton, 7.0).unwrap(),
            CopulaModel::new(CopulaFamily::Clayton, 0.4938).unwrap(),
            CopulaModel::new(CopulaFamily::Clayton, -0.5).unwrap(),
            CopulaModel::new(CopulaFamily::Gumbel, 6.3).unwrap(),
            CopulaModel::new(CopulaFamily::Gumbel, 1.2905).unwrap(),
            CopulaModel::new(CopulaFamily::Frank, 25.0).unwrap(),
            CopulaModel::new(CopulaFamily::Frank, -8.0).unwrap(),
        ]
    }

    #[test]
    fn parameter_domains() {
        assert!(CopulaModel::new(CopulaFamily::Fgm, 1.01).is_err());
        assert!(CopulaModel::new(CopulaFamily::Clayton, 0.0).is_err());
        assert!(CopulaModel::new(CopulaFamily::Clayton, -1.2).is_err());
        assert!(CopulaModel::new(CopulaFamily::Clayton, -1.0).is_ok());
        assert!(CopulaModel::new(CopulaFamily::Gumbel, 0.5).is_err());
        assert!(CopulaModel::new(CopulaFamily::Frank, 0.0).is_err());
        assert!(CopulaModel::new(CopulaFamily::Frank, f64::NAN).is_err());
    }

    #[test]
    fn boundary_values() {
        for c in models() {
            for x in [0.0, 0.13, 0.5, 0.91, 1.0] {
                assert_eq!(c.cdf(x, 0.0), 0.0);
                assert_eq!(c.cdf(0.0, x), 0.0);
                assert!((c.cdf(x, 1.0) - x).abs() < 1e-15);
                assert!((c.cdf(1.0, x) - x).abs() < 1e-15);
            }
            assert!((c.cdf(0.37, 1.0) - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn table_five_point_values() {
        let clayton = CopulaModel::new(CopulaFamily::Clayton, 0.4938).unwrap();
        let gumbel = CopulaModel::new(CopulaFamily::Gumbel, 1.2905).unwrap();
        assert!((gumbel.cdf(0.10, 0.10) - 0.0195).abs() < 1e-4);
        assert!((gumbel.cdf(0.15, 0.15) - 0.0390).abs() < 1e-4);
        assert!((gumbel.cdf(0.10, 0.15) - 0.0274).abs() < 1e-4);
        assert!((clayton.cdf(0.10, 0.15) - 0.0441).abs() < 1e-4);
        assert_eq!(clayton.cdf(0.10, 0.15), clayton.cdf(0.15, 0.10));
    }

    #[test]
    fn independence_density_is_flat() {
        let c = CopulaModel::independence();
        for (u, v) in [(0.1, 0.2), (0.5, 0.5), (0.99, 0.01)] {
            assert_eq!(c.density(u, v).unwrap(), 1.0);
        }
    }

    #[test]
    fn density_rejects_boundary() {
        let c = CopulaModel::new(CopulaFamily::Clayton, 2.0).unwrap();
        assert!(c.density(0.0, 0.5).is_err());
        assert!(c.density(0.5, 1.0).is_err());
    }

    #[test]
    fn density_matches_mixed_finite_difference() {
        let h = 1e-4;
        for c in models() {
            for i in 1..10 {
                for j in 1..10 {
                    let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                    let fd = (c.cdf(u + h, v + h) - c.cdf(u + h, v - h) - c.cdf(u - h, v + h)
                        + c.cdf(u - h, v - h))
                        / (4.0 * h * h);
                    let d = c.density(u, v).unwrap();
                    assert!(
                        (fd - d).abs() < 1e-5 * (1.0 + d),
                        "{:?} at ({u},{v}): fd {fd} vs {d}",
                        c
                    );
                }
            }
        }
    }

    #[test]
    fn h_matches_partial_derivative_and_inverts() {
        let e = 1e-6;
        for c in models() {
            for &u in &[0.05, 0.3, 0.5, 0.8, 0.95] {
                for &v in &[0.02, 0.4, 0.7, 0.97] {
                    let fd = (c.cdf(u + e, v) - c.cdf(u - e, v)) / (2.0 * e);
                    assert!((fd - c.h(u, v)).abs() < 1e-6, "{c:?} h at ({u},{v})");
                    let w = c.h(u, v);
                    if w > 1e-10 && w < 1.0 - 1e-10 {
                        let back = c.h_inverse(u, w);
                        assert!((c.h(u, back) - w).abs() < 1e-9, "{c:?} inverse at ({u},{v})");
                    }
                }
            }
        }
    }

    #[test]
    fn frechet_bounds_hold() {
        for c in models() {
            for i in 0..=20 {
                for j in 0..=20 {
                    let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                    let x = c.cdf(u, v);
                    assert!(x >= (u + v - 1.0).max(0.0) - 1e-15 && x <= u.min(v) + 1e-15);
                }
            }
        }
    }

    #[test]
    fn clayton_near_zero_is_product() {
        let c = CopulaModel::new(CopulaFamily::Clayton, 1e-4).unwrap();
        for (u, v) in [(0.2, 0.3), (0.7, 0.9), (0.5, 0.5)] {
            assert!((c.cdf(u, v) - u * v).abs() < 1e-3);
        }
    }

    #[test]
    fn independence_rectangle_is_product_of_lengths() {
        let c = CopulaModel::independence();
        let w = 0.1f64.powf(1.1);
        let m = c.rectangle_mass(0.9, 0.9 + w, 0.9, 0.9 + w).unwrap();
        assert!((m - w * w).abs() < 1e-15);
        assert!((m - 0.006310).abs() < 1e-6);
    }

    #[test]
    fn inverted_rectangle_is_an_error() {
        let c = CopulaModel::independence();
        assert!(c.rectangle_mass(0.5, 0.4, 0.1, 0.2).is_err());
        assert!(c.rectangle_mass(0.1, 0.2, 0.1, 1.2).is_err());
    }

    #[test]
    fn sample_pairs_are_interior_and_reproducible() {
        for c in models() {
            let a = c.sample(&mut RngContract::new(5).generator(), 500);
            let b = c.sample(&mut RngContract::new(5).generator(), 500);
            assert_eq!(a, b);
            assert!(a.iter().all(|&(u, v)| u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_mle(CopulaFamily::Clayton, &[(0.5, 0.5); 10]).is_err());
        assert!(fit_mle(CopulaFamily::Clayton, &[(0.5, 0.5); 40]).is_err());
        let mut pts = vec![(0.3, 0.4); 40];
        pts[3] = (0.0, 0.2);
        assert!(fit_mle(CopulaFamily::Gumbel, &pts).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in CopulaFamily::ALL {
            assert_eq!(f.name().parse::<CopulaFamily>().unwrap(), f);
        }
        assert!("student".parse::<CopulaFamily>().is_err());
    }
}
