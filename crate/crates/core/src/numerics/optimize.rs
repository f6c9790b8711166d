use crate::error::{Result, RiskError};

/// Maximizes `f` on `[lo, hi]` with golden-section search accelerated by
/// parabolic interpolation (Brent's `fmin`). The endpoints are compared
/// against the interior optimum, so a monotone `f` returns its boundary.
///
/// Non-finite values of `f` are treated as `-∞`.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let (mut x, mut fx) = brent_min(&g, lo, hi, tol);
    for end in [lo, hi] {
        let fe = g(end);
        if fe < fx {
            x = end;
            fx = fe;
        }
    }
    (x, -fx)
}

fn brent_min<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    const MAX_ITER: usize = 500;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        let tol1 = f64::EPSILON.sqrt() * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(m - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Result of a Nelder–Mead run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Best objective value after each iteration.
    pub trace: Vec<f64>,
}

/// Nelder–Mead minimization with reflection 1, expansion 2, contraction 0.5
/// and shrink 0.5. The initial simplex is `x0` plus `scale[i]` along axis `i`.
///
/// Stops after `iters` iterations or once both the spread of objective values
/// and the simplex diameter fall below machine-level thresholds.
pub fn minimize_simplex<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    scale: &[f64],
    iters: usize,
) -> Result<SimplexResult> {
    let n = x0.len();
    if n == 0 || scale.len() != n {
        return Err(RiskError::Domain(
            "simplex start and scale must be non-empty and of equal length".into(),
        ));
    }
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(RiskError::Domain(format!(
            "objective is not finite at the starting point ({f0})"
        )));
    }
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(f0);
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += scale[i];
        vals.push(eval(&p));
        pts.push(p);
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < iters {
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];

        let spread = (vals[worst] - vals[best]).abs();
        let diameter = pts
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let scale_x = 1.0 + pts[best].iter().map(|v| v.abs()).fold(0.0, f64::max);
        let converged = spread == 0.0
            || (diameter <= 1e-10 * scale_x && spread <= 1e-12 * (1.0 + vals[best].abs()));
        if converged {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &idx in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(&pts[idx]) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let f_r = eval(&reflected);
        if f_r < vals[best] {
            let expanded = along(2.0);
            let f_e = eval(&expanded);
            if f_e < f_r {
                pts[worst] = expanded;
                vals[worst] = f_e;
            } else {
                pts[worst] = reflected;
                vals[worst] = f_r;
            }
        } else if f_r < vals[second] {
            pts[worst] = reflected;
            vals[worst] = f_r;
        } else {
            let (candidate, f_c) = if f_r < vals[worst] {
                let p = along(0.5);
                let v = eval(&p);
                (p, v)
            } else {
                let p = along(-0.5);
                let v = eval(&p);
                (p, v)
            };
            if f_c < vals[worst].min(f_r) {
                pts[worst] = candidate;
                vals[worst] = f_c;
            } else {
                let anchor = pts[best].clone();
                for idx in 0..=n {
                    if idx == best {
                        continue;
                    }
                    for (p, a) in pts[idx].iter_mut().zip(&anchor) {
                        *p = a + 0.5 * (*p - a);
                    }
                    vals[idx] = eval(&pts[idx]);
                }
            }
        }
        trace.push(vals.iter().copied().fold(f64::INFINITY, f64::min));
    }

    let best = (0..=n)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)))
        .expect("simplex has vertices");
    Ok(SimplexResult {
        x: pts[best].clone(),
        value: vals[best],
        iterations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_parabola_peak() {
        let (x, fx) = maximize_1d(|x| -(x - 1.0) * (x - 1.0), 0.0, 3.0, 1e-10);
        assert!((x - 1.0).abs() < 1e-7);
        assert!(fx.abs() < 1e-13);
    }

    #[test]
    fn monotone_objective_hits_the_boundary() {
        let (x, _) = maximize_1d(|x| x, -2.0, 5.0, 1e-10);
        assert_eq!(x, 5.0);
        let (x, _) = maximize_1d(|x| -x, -2.0, 5.0, 1e-10);
        assert_eq!(x, -2.0);
    }

    #[test]
    fn rosenbrock_valley() {
        let rosen = |p: &[f64]| {
            let (x, y) = (p[0], p[1]);
            (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
        };
        let r = minimize_simplex(rosen, &[-1.2, 1.0], &[0.1, 0.1], 2000).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
        assert!(r.iterations <= 2000);
    }

    #[test]
    fn quadratic_bowl() {
        let bowl = |p: &[f64]| (p[0] - 3.0).powi(2) + 2.0 * (p[1] + 1.0).powi(2) + p[2] * p[2];
        let r = minimize_simplex(bowl, &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 5000).unwrap();
        assert!((r.x[0] - 3.0).abs() < 1e-8);
        assert!((r.x[1] + 1.0).abs() < 1e-8);
        assert!(r.x[2].abs() < 1e-8);
    }

    #[test]
    fn constant_objective_returns_start() {
        let r = minimize_simplex(|_| 4.2, &[0.3, -0.7], &[1.0, 1.0], 100).unwrap();
        assert_eq!(r.x, vec![0.3, -0.7]);
        assert_eq!(r.value, 4.2);
    }

    #[test]
    fn trace_never_increases() {
        let f = |p: &[f64]| (p[0].sin() + 2.0 * p[1] * p[1]).abs() + (p[0] - 0.5).abs();
        let r = minimize_simplex(f, &[2.0, 1.0], &[0.5, 0.5], 300).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn non_finite_start_is_rejected() {
        assert!(minimize_simplex(|p| p[0].ln(), &[-1.0], &[1.0], 10).is_err());
    }
}
