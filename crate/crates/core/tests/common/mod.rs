#![allow(dead_code)]

use dcovar_core::copula::{CopulaFamily, CopulaModel};
use dcovar_core::garch::{GarchSpec, Innovation};
use dcovar_core::dist::{Marginal, MarginalModel};
use dcovar_core::numerics::{open_unit, RngContract, SimRng};
use dcovar_core::risk::{
    ccovar, dcovar_copula, dcovar_joint_density, dcovar_quantile_form, empirical_dcovar, mcovar,
    quantile_box, DependentPair, RiskLevels,
};

fn uniform(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * open_unit(rng)
}

/// Marginal with a finite upper-tail mean.
pub fn random_marginal(rng: &mut SimRng) -> MarginalModel {
    match (open_unit(rng) * 4.0) as u32 {
        0 => MarginalModel::pareto_lomax(uniform(rng, 0.5, 3.0), uniform(rng, 1.5, 5.0)).unwrap(),
        1 => MarginalModel::gamma(uniform(rng, 0.5, 4.0), uniform(rng, 0.5, 2.0)).unwrap(),
        2 => MarginalModel::location_scale(
            MarginalModel::student_t(uniform(rng, 3.0, 10.0)).unwrap(),
            uniform(rng, -1.0, 1.0),
            uniform(rng, 0.5, 2.0),
        )
        .unwrap(),
        _ => MarginalModel::pareto_lomax(uniform(rng, 0.5, 3.0), uniform(rng, 2.0, 4.0)).unwrap(),
    }
}

/// Copula with positive dependence.
pub fn random_positive_copula(rng: &mut SimRng) -> CopulaModel {
    match (open_unit(rng) * 4.0) as u32 {
        0 => CopulaModel::new(CopulaFamily::Fgm, uniform(rng, 0.05, 1.0)).unwrap(),
        1 => CopulaModel::new(CopulaFamily::Clayton, uniform(rng, 0.2, 10.0)).unwrap(),
        2 => CopulaModel::new(CopulaFamily::Gumbel, uniform(rng, 1.05, 6.0)).unwrap(),
        _ => CopulaModel::new(CopulaFamily::Frank, uniform(rng, 0.5, 25.0)).unwrap(),
    }
}

/// Copula of either sign of dependence.
pub fn random_copula(rng: &mut SimRng) -> CopulaModel {
    match (open_unit(rng) * 4.0) as u32 {
        0 => CopulaModel::new(CopulaFamily::Fgm, uniform(rng, -1.0, 1.0)).unwrap(),
        1 => CopulaModel::new(CopulaFamily::Clayton, uniform(rng, 0.2, 10.0)).unwrap(),
        2 => CopulaModel::new(CopulaFamily::Gumbel, uniform(rng, 1.0, 6.0)).unwrap(),
        _ => CopulaModel::new(CopulaFamily::Frank, uniform(rng, -15.0, 25.0)).unwrap(),
    }
}

pub fn random_pair(rng: &mut SimRng, positive: bool) -> DependentPair {
    let target = random_marginal(rng);
    let associate = random_marginal(rng);
    let copula = if positive {
        random_positive_copula(rng)
    } else {
        random_copula(rng)
    };
    DependentPair::new(target, associate, copula)
}

pub fn random_levels(rng: &mut SimRng) -> RiskLevels {
    RiskLevels::new(
        uniform(rng, 0.8, 0.97),
        uniform(rng, 0.05, 1.0),
        uniform(rng, 0.8, 0.97),
        uniform(rng, 0.05, 1.0),
    )
    .unwrap()
}

/// Draws `n` loss pairs `(S, Y)` from a dependent pair by conditional inversion.
pub fn sample_losses(pair: &DependentPair, rng: &mut SimRng, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let (u, v) = pair.copula.sample_pair(rng);
            (
                pair.target.quantile(u).unwrap(),
                pair.associate.quantile(v).unwrap(),
            )
        })
        .collect()
}

/// Mean and standard error of `s` over the draws that land in a loss-space box.
pub fn mc_box_mean(
    draws: impl Iterator<Item = (f64, f64)>,
    s_lo: f64,
    s_hi: f64,
    y_lo: f64,
    y_hi: f64,
) -> (f64, f64, usize) {
    let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
    for (s, y) in draws {
        if s >= s_lo && s <= s_hi && y >= y_lo && y <= y_hi {
            n += 1;
            sum += s;
            sq += s * s;
        }
    }
    let mean = sum / n as f64;
    let var = (sq / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt(), n)
}

pub type Check = std::result::Result<(), String>;

/// `MCoVaR ≤ DCoVaR(d = 0) ≤ CCoVaR` for a random positively dependent pair.
pub fn check_ordering(seed: u64) -> Check {
    let mut rng = RngContract::new(seed).generator();
    let pair = random_pair(&mut rng, true);
    let l0 = random_levels(&mut rng);
    let l = RiskLevels::new(l0.alpha(), l0.a(), l0.delta(), 0.0).map_err(|e| e.to_string())?;
    let m = mcovar(&pair.target, l.alpha(), l.a()).map_err(|e| format!("mcovar: {e}"))?;
    let d = dcovar_copula(&pair, &l).map_err(|e| format!("dcovar: {e}"))?;
    let c = ccovar(&pair, l.alpha(), l.delta()).map_err(|e| format!("ccovar: {e}"))?;
    let slack = 1e-8 * d.abs().max(1.0);
    if m > d + slack {
        return Err(format!("seed {seed}: mcovar {m} > dcovar {d}"));
    }
    if d > c + slack {
        return Err(format!("seed {seed}: dcovar {d} > ccovar {c}"));
    }
    Ok(())
}

/// Copula, quantile-form and joint-density paths agree to `1e-5` relative.
pub fn check_paths(seed: u64) -> Check {
    let mut rng = RngContract::new(seed).generator();
    let pair = random_pair(&mut rng, true);
    let l = random_levels(&mut rng);
    let d = dcovar_copula(&pair, &l).map_err(|e| e.to_string())?;
    let q = dcovar_quantile_form(&pair, &l).map_err(|e| e.to_string())?;
    let b = quantile_box(&pair, &l).map_err(|e| e.to_string())?;
    let joint = |s: f64, y: f64| {
        let (fs, gy) = (pair.target.pdf(s), pair.associate.pdf(y));
        if fs == 0.0 || gy == 0.0 {
            return 0.0;
        }
        pair.copula
            .density(pair.target.cdf(s), pair.associate.cdf(y))
            .unwrap_or(0.0)
            * fs
            * gy
    };
    let j = dcovar_joint_density(joint, b).map_err(|e| e.to_string())?;
    let scale = d.abs().max(1e-3);
    for (name, v) in [("quantile form", q), ("joint density", j)] {
        if (v - d).abs() > 1e-5 * scale {
            return Err(format!("seed {seed}: copula path {d} vs {name} {v}"));
        }
    }
    Ok(())
}

/// Seeded Monte Carlo `D(S + S′ | Y) ≤ D(S | Y) + D(S′ | Y)` up to three
/// combined standard errors. `S` and `S′` are Lomax losses, each coupled to
/// a common Lomax `Y` by its own copula. With `truncated` false the bands
/// run to 1 (`a = d = 0`).
pub fn check_subadditivity(seed: u64, n: usize, truncated: bool) -> Check {
    let mut rng = RngContract::new(seed).generator();
    let s1 = MarginalModel::pareto_lomax(uniform(&mut rng, 0.5, 3.0), uniform(&mut rng, 2.0, 5.0)).unwrap();
    let s2 = MarginalModel::pareto_lomax(uniform(&mut rng, 0.5, 3.0), uniform(&mut rng, 2.0, 5.0)).unwrap();
    let y = MarginalModel::pareto_lomax(uniform(&mut rng, 0.5, 3.0), uniform(&mut rng, 1.5, 5.0)).unwrap();
    let c1 = random_positive_copula(&mut rng);
    let c2 = random_positive_copula(&mut rng);
    let keep = if truncated { 1.0 } else { 0.0 };
    let l = RiskLevels::new(
        uniform(&mut rng, 0.8, 0.95),
        keep * uniform(&mut rng, 0.05, 0.5),
        uniform(&mut rng, 0.8, 0.95),
        keep * uniform(&mut rng, 0.05, 0.5),
    )
    .unwrap();
    let (mut a, mut b, mut sum) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let v = open_unit(&mut rng);
        let u1 = c1.h_inverse(v, open_unit(&mut rng));
        let u2 = c2.h_inverse(v, open_unit(&mut rng));
        let (x1, x2, yy) = (s1.quantile(u1).unwrap(), s2.quantile(u2).unwrap(), y.quantile(v).unwrap());
        a.push((x1, yy));
        b.push((x2, yy));
        sum.push((x1 + x2, yy));
    }
    let est = |pts: &[(f64, f64)]| empirical_dcovar(pts, &l).map_err(|e| format!("seed {seed}: {e}"));
    let (ea, eb, es) = (est(&a)?, est(&b)?, est(&sum)?);
    let se = (ea.std_error.powi(2) + eb.std_error.powi(2) + es.std_error.powi(2)).sqrt();
    if es.value > ea.value + eb.value + 3.0 * se {
        return Err(format!(
            "seed {seed}: D(S+S') {} > {} + {} (se {se})",
            es.value, ea.value, eb.value
        ));
    }
    Ok(())
}

/// Paired GARCH-t losses whose innovations are Clayton-coupled.
pub fn coupled_series(seed: u64, n: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let c = CopulaModel::new(CopulaFamily::Clayton, theta).unwrap();
    let gs = GarchSpec::new(0.02, 0.06, 0.9, 6.0).unwrap();
    let gy = GarchSpec::new(0.04, 0.08, 0.88, 8.0).unwrap();
    let es = gs.innovation_model(Innovation::Standardized);
    let ey = gy.innovation_model(Innovation::Standardized);
    let mut rng = RngContract::new(seed).generator();
    let (mut hs, mut hy) = (gs.unconditional_variance(), gy.unconditional_variance());
    let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (u, v) = c.sample_pair(&mut rng);
        let x = es.quantile(u).unwrap() * hs.sqrt();
        let y = ey.quantile(v).unwrap() * hy.sqrt();
        hs = gs.kappa0() + gs.kappa1() * x * x + gs.eta() * hs;
        hy = gy.kappa0() + gy.kappa1() * y * y + gy.eta() * hy;
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}
