//! Univariate loss marginals.
//!
//! Every family exposes density, distribution function, quantile and
//! inverse-transform sampling through the [`Marginal`] trait. Lomax quantiles
//! are closed form; Gamma and Student-t quantiles invert the cdf with a
//! bracketed Brent search.
//!
//! The Student-t family defaults to the unit-variance ("standardized")
//! parameterisation used for GARCH innovations; [`MarginalModel::student_t_raw`]
//! gives the textbook t with scale 1.

use rand::RngCore;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Result, RiskError};
use crate::numerics::{brent, open_unit};

/// Interface shared by every loss distribution a risk measure can consume.
pub trait Marginal {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn quantile(&self, p: f64) -> Result<f64>;

    /// `Q(1 − p)` for an upper-tail probability `p`, accurate for tiny `p`.
    fn upper_quantile(&self, p: f64) -> Result<f64> {
        self.quantile(1.0 - p)
    }

    /// Lower and upper end of the support.
    fn support(&self) -> (f64, f64);

    /// Whether `E[X; X > q]` is finite for every finite `q`.
    fn has_finite_upper_mean(&self) -> bool;

    /// Inverse-transform sample of size `n`.
    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                self.quantile(open_unit(rng))
                    .expect("open-interval probability is always invertible")
            })
            .collect()
    }

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Pareto type II: `F(x) = 1 - (β / (x + β))^γ`, `x ≥ 0`.
    ParetoLomax { scale: f64, shape: f64 },
    /// Gamma with shape `τ` and scale `ω`.
    Gamma { shape: f64, scale: f64 },
    /// Student-t with `ν` degrees of freedom; unit variance when `standardized`.
    StudentT { nu: f64, standardized: bool },
    /// `μ + σ·Z` for an inner model `Z`.
    LocationScale {
        inner: Box<MarginalModel>,
        location: f64,
        scale: f64,
    },
}

/// A validated univariate marginal. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalModel {
    family: Family,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(RiskError::ParameterDomain(format!("{name} must be a positive real, got {v}")))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(RiskError::Domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

impl MarginalModel {
    /// Lomax loss with scale `β` and shape `γ`.
    pub fn pareto_lomax(scale: f64, shape: f64) -> Result<Self> {
        positive("Lomax scale", scale)?;
        positive("Lomax shape", shape)?;
        Ok(Self {
            family: Family::ParetoLomax { scale, shape },
        })
    }

    /// Unit-shape Lomax, `F(x) = 1 - β/(x + β)`.
    pub fn pareto(scale: f64) -> Result<Self> {
        Self::pareto_lomax(scale, 1.0)
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        positive("Gamma shape", shape)?;
        positive("Gamma scale", scale)?;
        Ok(Self {
            family: Family::Gamma { shape, scale },
        })
    }

    /// Unit-variance Student-t (requires `ν > 2`).
    pub fn student_t(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 2.0) {
            return Err(RiskError::ParameterDomain(format!(
                "standardized Student-t needs nu > 2, got {nu}"
            )));
        }
        Ok(Self {
            family: Family::StudentT {
                nu,
                standardized: true,
            },
        })
    }

    /// Textbook Student-t with unit scale.
    pub fn student_t_raw(nu: f64) -> Result<Self> {
        positive("Student-t degrees of freedom", nu)?;
        Ok(Self {
            family: Family::StudentT {
                nu,
                standardized: false,
            },
        })
    }

    pub fn location_scale(inner: MarginalModel, location: f64, scale: f64) -> Result<Self> {
        positive("location-scale scale", scale)?;
        if !location.is_finite() {
            return Err(RiskError::ParameterDomain(format!(
                "location must be finite, got {location}"
            )));
        }
        Ok(Self {
            family: Family::LocationScale {
                inner: Box::new(inner),
                location,
                scale,
            },
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    fn t_scale(nu: f64, standardized: bool) -> f64 {
        if standardized {
            ((nu - 2.0) / nu).sqrt()
        } else {
            1.0
        }
    }

    fn numeric_quantile(&self, p: f64) -> Result<f64> {
        let (lo_support, _) = self.support();
        let anchor = if lo_support.is_finite() { lo_support } else { 0.0 };
        let mut lo = if lo_support.is_finite() { lo_support } else { -1.0 };
        let mut hi = anchor + 1.0;
        while self.cdf(hi) < p {
            hi = anchor + 2.0 * (hi - anchor);
            if !hi.is_finite() {
                return Err(RiskError::Domain(format!("cannot bracket quantile {p}")));
            }
        }
        while self.cdf(lo) > p {
            lo *= 2.0;
            if !lo.is_finite() {
                return Err(RiskError::Domain(format!("cannot bracket quantile {p}")));
            }
        }
        let tol = 1e-14 * p.min(1.0 - p);
        brent(|x| self.cdf(x) - p, lo, hi, tol).map(|r| r.x)
    }
}

impl Marginal for MarginalModel {
    fn pdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::ParetoLomax { scale, shape } => {
                if x < 0.0 {
                    0.0
                } else {
                    shape / scale * (-(shape + 1.0) * (x / scale).ln_1p()).exp()
                }
            }
            Family::Gamma { shape, scale } => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                        _ => 0.0,
                    }
                } else {
                    let z = x / scale;
                    ((shape - 1.0) * z.ln() - z - ln_gamma(*shape)).exp() / scale
                }
            }
            Family::StudentT { nu, standardized } => {
                let s = Self::t_scale(*nu, *standardized);
                let z = x / s;
                let log_norm =
                    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI).ln();
                (log_norm - 0.5 * (nu + 1.0) * (z * z / nu).ln_1p()).exp() / s
            }
            Family::LocationScale {
                inner,
                location,
                scale,
            } => inner.pdf((x - location) / scale) / scale,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match &self.family {
            Family::ParetoLomax { scale, shape } => {
                if x <= 0.0 {
                    0.0
                } else if x == f64::INFINITY {
                    1.0
                } else if *shape == 1.0 {
                    x / (x + scale)
                } else {
                    -(-shape * (x / scale).ln_1p()).exp_m1()
                }
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else if x == f64::INFINITY {
                    1.0
                } else {
                    gamma_lr(*shape, x / scale)
                }
            }
            Family::StudentT { nu, standardized } => {
                if x == f64::INFINITY {
                    return 1.0;
                }
                if x == f64::NEG_INFINITY {
                    return 0.0;
                }
                let z = x / Self::t_scale(*nu, *standardized);
                let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + z * z));
                if z > 0.0 {
                    1.0 - tail
                } else {
                    tail
                }
            }
            Family::LocationScale {
                inner,
                location,
                scale,
            } => inner.cdf((x - location) / scale),
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        match &self.family {
            Family::ParetoLomax { scale, shape } => {
                if *shape == 1.0 {
                    Ok(scale * (1.0 / (1.0 - p) - 1.0))
                } else {
                    Ok(scale * (-(-p).ln_1p() / shape).exp_m1())
                }
            }
            Family::StudentT { .. } if p == 0.5 => Ok(0.0),
            Family::Gamma { .. } | Family::StudentT { .. } => self.numeric_quantile(p),
            Family::LocationScale {
                inner,
                location,
                scale,
            } => Ok(location + scale * inner.quantile(p)?),
        }
    }

    fn upper_quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        match &self.family {
            Family::ParetoLomax { scale, shape } => Ok(scale * (-p.ln() / shape).exp_m1()),
            Family::StudentT { .. } => Ok(-self.quantile(p)?),
            Family::LocationScale {
                inner,
                location,
                scale,
            } => Ok(location + scale * inner.upper_quantile(p)?),
            Family::Gamma { .. } => self.quantile(1.0 - p),
        }
    }

    fn support(&self) -> (f64, f64) {
        match &self.family {
            Family::ParetoLomax { .. } | Family::Gamma { .. } => (0.0, f64::INFINITY),
            Family::StudentT { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::LocationScale {
                inner,
                location,
                scale,
            } => {
                let (lo, hi) = inner.support();
                (location + scale * lo, location + scale * hi)
            }
        }
    }

    fn has_finite_upper_mean(&self) -> bool {
        match &self.family {
            Family::ParetoLomax { shape, .. } => *shape > 1.0,
            Family::Gamma { .. } => true,
            Family::StudentT { nu, .. } => *nu > 1.0,
            Family::LocationScale { inner, .. } => inner.has_finite_upper_mean(),
        }
    }

    fn describe(&self) -> String {
        match &self.family {
            Family::ParetoLomax { scale, shape } => format!("Lomax(beta={scale}, gamma={shape})"),
            Family::Gamma { shape, scale } => format!("Gamma(shape={shape}, scale={scale})"),
            Family::StudentT { nu, standardized } => {
                if *standardized {
                    format!("StdT(nu={nu})")
                } else {
                    format!("T(nu={nu})")
                }
            }
            Family::LocationScale {
                inner,
                location,
                scale,
            } => format!("{location} + {scale} * {}", inner.describe()),
        }
    }
}

impl MarginalModel {
    /// Upper-tail probability `1 - F(x)` without cancellation in the far tail.
    pub fn survival(&self, x: f64) -> f64 {
        match &self.family {
            Family::ParetoLomax { scale, shape } if x > 0.0 => {
                (-shape * (x / scale).ln_1p()).exp()
            }
            Family::Gamma { shape, scale } if x > 0.0 => gamma_ur(*shape, x / scale),
            _ => 1.0 - self.cdf(x),
        }
    }
}
