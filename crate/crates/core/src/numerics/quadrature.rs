//! Adaptive Gauss–Kronrod (7/15) quadrature in one and two dimensions.
//!
//! Infinite limits are handled by mapping onto a finite parameter interval
//! before subdivision:
//!
//! * `[a, ∞)`  with `x = a + t/(1-t)`
//! * `(-∞, b]` with `x = b - (1-t)/t`
//! * `(-∞, ∞)` with `x = t/(1-t²)`
//!
//! Kronrod nodes never touch the interval ends, so the mapped integrands are
//! never evaluated at the singular endpoint of the map.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, RiskError};

/// Tolerances and subdivision limit for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_depth: 30,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_depth,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(RiskError::Domain(format!(
                "quadrature tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(RiskError::Domain("max_depth must be at least 1".into()));
        }
        Ok(())
    }

    /// Spec used for the inner dimension of a tensor integral.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_depth: self.max_depth,
        }
    }
}

/// Integration rectangle for [`integrate_2d`]; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(RiskError::Domain(format!(
            "integrand is not finite on [{lo}, {hi}]"
        )));
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    Ok((value, err))
}

/// Globally adaptive integration over a finite interval.
fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    const MAX_SEGMENTS: usize = 20_000;
    let (value, error) = kronrod15(f, lo, hi)?;
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
        depth: 0,
    });
    loop {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        if worst.depth >= spec.max_depth || heap.len() + 2 > MAX_SEGMENTS {
            return Err(RiskError::Convergence {
                estimate: total,
                error: total_err,
            });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let (v1, e1) = kronrod15(f, worst.lo, mid)?;
        let (v2, e2) = kronrod15(f, mid, worst.hi)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        if heap.len() % 64 == 0 {
            // re-sum to shed accumulated cancellation error in the running totals
            total = heap.iter().map(|s| s.value).sum::<f64>() + v1 + v2;
            total_err = heap.iter().map(|s| s.error).sum::<f64>() + e1 + e2;
        }
        let depth = worst.depth + 1;
        heap.push(Segment {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
            depth,
        });
        heap.push(Segment {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
            depth,
        });
    }
}

/// Integrates `f` over `[lo, hi]`; either bound may be infinite.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if lo.is_nan() || hi.is_nan() || !(lo < hi) {
        return Err(RiskError::Domain(format!(
            "integration bounds must satisfy lo < hi (got [{lo}, {hi}])"
        )));
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(&f, lo, hi, spec),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(lo + t / s) / (s * s)
            };
            adaptive(&g, 0.0, 1.0, spec)
        }
        (false, true) => {
            let g = |t: f64| f(hi - (1.0 - t) / t) / (t * t);
            adaptive(&g, 0.0, 1.0, spec)
        }
        (false, false) => {
            let g = |t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * (1.0 + t * t) / (s * s)
            };
            adaptive(&g, -1.0, 1.0, spec)
        }
    }
}

/// Iterated adaptive quadrature over a rectangle (x outer, y inner).
///
/// The inner integrals run with tolerances ten times tighter than `spec`.
/// A failure in any inner integral is reported as a convergence error
/// carrying the outer estimate.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    rect: Rect,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    let inner_spec = spec.tightened(10.0);
    let inner_failure: RefCell<Option<RiskError>> = RefCell::new(None);
    let outer = |x: f64| match integrate_1d(|y| f(x, y), rect.y_lo, rect.y_hi, &inner_spec) {
        Ok(v) => v,
        Err(RiskError::Convergence { estimate, .. }) => {
            inner_failure
                .borrow_mut()
                .get_or_insert(RiskError::Convergence {
                    estimate,
                    error: f64::NAN,
                });
            estimate
        }
        Err(e) => {
            inner_failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let result = integrate_1d(outer, rect.x_lo, rect.x_hi, spec);
    if let Some(err) = inner_failure.into_inner() {
        return Err(match (err, result) {
            (RiskError::Convergence { .. }, Ok(v)) => RiskError::Convergence {
                estimate: v,
                error: f64::NAN,
            },
            (e, _) => e,
        });
    }
    result
}
