use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dcovar_core::copula::{fit_mle as fit_copula, CopulaFamily, CopulaModel};
use dcovar_core::empirical::pseudo_observations;
use dcovar_core::garch::{
    dcovar_forecast, fit_mle_with, rolling_backtest, table5_levels, BacktestOptions, GarchFit,
    GarchOptions, Innovation,
};
use dcovar_core::io::{full, pct2, read_series_file, write_versioned_csv, CSV_SCHEMA_VERSION};
use dcovar_core::numerics::RNG_ALGORITHM;
use dcovar_core::risk::{
    audit_aggregate_closed, audit_fgm_closed, joint_significance, write_audit_csv,
    AggregateParetoModel, DependentPair, RiskLevels, Tail,
};
use dcovar_core::simulate::{
    linspace, run_scenario, sweep_delta_curve, table_grid, write_curve_csv, AssociateKind,
    SimScenario,
};
use serde::Serialize;

use crate::args::*;

#[derive(Serialize)]
struct RunConfig<'a, A: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    rng: &'static str,
    schema_version: u32,
    args: &'a A,
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// Writes a report to `output` (or stdout) and its run configuration to
/// `<output>.config.json` (or stderr).
fn emit<A: Serialize>(
    command: &str,
    args: &A,
    output: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> dcovar_core::Result<()>,
) -> Result<()> {
    let config = RunConfig {
        tool: "dcovar",
        version: env!("CARGO_PKG_VERSION"),
        command,
        rng: RNG_ALGORITHM,
        schema_version: CSV_SCHEMA_VERSION,
        args,
    };
    let json = serde_json::to_string_pretty(&config)?;
    match output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut out = BufWriter::new(file);
            write(&mut out)?;
            out.flush()?;
            let side = sidecar_path(path);
            std::fs::write(&side, json + "\n").with_context(|| format!("writing {}", side.display()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush()?;
            eprintln!("{json}");
        }
    }
    Ok(())
}

fn associate_kind(a: AssociateArg) -> AssociateKind {
    match a {
        AssociateArg::Single => AssociateKind::Single,
        AssociateArg::Aggregate => AssociateKind::AggregateS2,
        AssociateArg::Parameter => AssociateKind::ParameterLambda,
    }
}

fn build_pair(m: &ModelArgs, copula: CopulaModel) -> dcovar_core::Result<DependentPair> {
    match m.associate {
        AssociateArg::Single => SimScenario::pareto_single(m.beta1, m.beta_a, copula),
        AssociateArg::Aggregate => SimScenario::pareto_aggregate(m.beta1, m.lambda_shape, m.beta_a, copula),
        AssociateArg::Parameter => SimScenario::pareto_parameter(m.beta1, m.tau, m.omega, copula),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let copula = CopulaModel::new(args.copula, args.theta)?;
    let pair = build_pair(&args.model, copula)?;
    let levels = table_grid(&args.alpha, &args.delta, args.a, args.d)?;
    let scenario = SimScenario::new(pair, levels, args.n_obs, args.seed, associate_kind(args.model.associate))?;
    let report = run_scenario(&scenario)?;
    emit("simulate", args, args.output.as_deref(), |out| report.write_csv(out))
}

pub fn curve(args: &CurveArgs) -> Result<()> {
    if args.points < 2 {
        bail!("--points must be at least 2");
    }
    let pair = build_pair(&args.model, CopulaModel::new(args.copula, args.theta)?)?;
    let grid = linspace(args.delta_from, args.delta_to, args.points);
    let points = sweep_delta_curve(&pair, args.alpha, args.a, args.d, &grid)?;
    emit("curve", args, args.output.as_deref(), |out| write_curve_csv(out, &points))
}

fn innovation_name(i: Innovation) -> &'static str {
    match i {
        Innovation::Standardized => "standardized",
        Innovation::Raw => "raw",
    }
}

fn load_losses(input: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let table = read_series_file(input).with_context(|| format!("reading {}", input.display()))?;
    table.losses().with_context(|| format!("reading {}", input.display()))
}

fn load_pair(input: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = read_series_file(input).with_context(|| format!("reading {}", input.display()))?;
    table.loss_pair().with_context(|| format!("reading {}", input.display()))
}

fn prefix(xs: &[f64], k: Option<usize>) -> Result<&[f64]> {
    match k {
        Some(k) if k > xs.len() => bail!("--in-sample {k} exceeds the {} available losses", xs.len()),
        Some(k) => Ok(&xs[..k]),
        None => Ok(xs),
    }
}

fn garch_options(innovation: InnovationArg) -> GarchOptions {
    GarchOptions {
        innovation: innovation.into(),
        h0: None,
    }
}

const GARCH_CSV_HEADER: [&str; 8] = ["series", "n", "kappa0", "kappa1", "eta", "nu", "loglik", "innovation"];

fn garch_rows(input: &Path, in_sample: Option<usize>, innovation: InnovationArg) -> Result<Vec<Vec<String>>> {
    let opts = garch_options(innovation);
    let mut rows = Vec::new();
    for (name, losses) in load_losses(input)? {
        let xs = prefix(&losses, in_sample)?;
        let fit = fit_mle_with(xs, &opts).with_context(|| format!("fitting {name}"))?;
        let s = fit.spec;
        rows.push(vec![
            name,
            xs.len().to_string(),
            full(s.kappa0()),
            full(s.kappa1()),
            full(s.eta()),
            full(s.nu()),
            full(fit.loglik),
            innovation_name(fit.innovation).to_string(),
        ]);
    }
    Ok(rows)
}

pub fn garch_fit(args: &GarchFitArgs) -> Result<()> {
    let rows = garch_rows(&args.input, args.in_sample, args.innovation)?;
    emit("garch-fit", args, args.output.as_deref(), |out| {
        write_versioned_csv(out, "garch-fit", &GARCH_CSV_HEADER, &rows)
    })
}

fn fit_pair(s: &[f64], y: &[f64], innovation: InnovationArg) -> Result<(GarchFit, GarchFit)> {
    let opts = garch_options(innovation);
    let fs = fit_mle_with(s, &opts).context("fitting the first series")?;
    let fy = fit_mle_with(y, &opts).context("fitting the second series")?;
    Ok((fs, fy))
}

pub fn copula_fit(args: &CopulaFitArgs) -> Result<()> {
    let (s, y) = load_pair(&args.input)?;
    let (fs, fy) = fit_pair(prefix(&s, args.in_sample)?, prefix(&y, args.in_sample)?, args.innovation)?;
    let pseudo = pseudo_observations(&fs.standardized_residuals, &fy.standardized_residuals)?;
    let families = match args.copula {
        Some(f) => vec![f],
        None => CopulaFamily::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    for family in families {
        let fit = fit_copula(family, &pseudo).with_context(|| format!("fitting the {family} copula"))?;
        rows.push(vec![
            family.name().to_string(),
            full(fit.model.theta()),
            full(fit.log_likelihood),
            fit.n.to_string(),
        ]);
    }
    emit("copula-fit", args, args.output.as_deref(), |out| {
        write_versioned_csv(out, "copula-fit", &["copula", "theta", "loglik", "n"], &rows)
    })
}

fn tail_name(t: Tail) -> &'static str {
    match t {
        Tail::Upper => "upper",
        Tail::Lower => "lower",
    }
}

pub fn forecast(args: &ForecastArgs) -> Result<()> {
    let (s, y) = load_pair(&args.input)?;
    let (fs, fy) = fit_pair(&s, &y, args.innovation)?;
    let copula = match args.theta {
        Some(theta) => CopulaModel::new(args.copula, theta)?,
        None => {
            let pseudo = pseudo_observations(&fs.standardized_residuals, &fy.standardized_residuals)?;
            fit_copula(args.copula, &pseudo)?.model
        }
    };
    let tail: Tail = args.tail.into();
    let levels = RiskLevels::with_tail(args.alpha, args.a, args.delta, args.d, tail)?;
    let t = fs.observations();
    let dcovar = dcovar_forecast(&fs, &fy, &copula, &levels, t)?;
    let row = vec![
        copula.family().name().to_string(),
        full(copula.theta()),
        full(args.alpha),
        full(args.delta),
        full(args.a),
        full(args.d),
        tail_name(tail).to_string(),
        t.to_string(),
        full(fs.filtered_h[t].sqrt()),
        full(fy.filtered_h[t].sqrt()),
        pct2(joint_significance(&copula, &levels)?),
        full(dcovar),
    ];
    let header = [
        "copula", "theta", "alpha", "delta", "a", "d", "tail", "t", "sigma_s", "sigma_y", "joint_sig_pct", "dcovar",
    ];
    emit("forecast", args, args.output.as_deref(), |out| {
        write_versioned_csv(out, "forecast", &header, &[row])
    })
}

fn backtest_levels(args: &BacktestArgs) -> Result<Vec<RiskLevels>> {
    let tail: Tail = args.tail.into();
    let cells: Vec<(f64, f64)> = match (&args.alpha, &args.delta) {
        (None, None) => table5_levels().iter().map(|l| (l.alpha(), l.delta())).collect(),
        (Some(alphas), Some(deltas)) => alphas
            .iter()
            .flat_map(|&a| deltas.iter().map(move |&d| (a, d)))
            .collect(),
        _ => bail!("--alpha and --delta must be given together"),
    };
    Ok(cells
        .into_iter()
        .map(|(alpha, delta)| RiskLevels::with_tail(alpha, args.a, delta, args.d, tail))
        .collect::<dcovar_core::Result<_>>()?)
}

pub fn backtest(args: &BacktestArgs) -> Result<()> {
    let (s, y) = load_pair(&args.input)?;
    let levels = backtest_levels(args)?;
    let opts = BacktestOptions {
        innovation: args.innovation.into(),
        refit_every: args.refit_every,
        fixed_theta: args.theta,
    };
    let report = rolling_backtest(&s, &y, args.copula, &levels, args.in_sample, &opts)?;
    emit("backtest", args, args.output.as_deref(), |out| report.write_csv(out))?;
    if let Some(path) = &args.forecasts {
        emit("backtest", args, Some(path), |out| report.write_forecasts_csv(out))?;
    }
    Ok(())
}

fn table_defaults(which: Which) -> (CopulaFamily, f64) {
    match which {
        Which::One => (CopulaFamily::Clayton, 7.0),
        Which::Two => (CopulaFamily::Gumbel, 6.3),
        Which::Three => (CopulaFamily::Frank, 25.0),
        _ => (CopulaFamily::Gumbel, 1.2905),
    }
}

fn simulation_table(args: &TableArgs) -> Result<()> {
    let (family, theta) = table_defaults(args.which);
    let sim = SimulateArgs {
        copula: args.copula.unwrap_or(family),
        theta: args.theta.unwrap_or(theta),
        alpha: vec![0.9, 0.95],
        delta: vec![0.9, 0.925, 0.95],
        a: 0.1,
        d: 0.1,
        n_obs: args.n_obs,
        seed: args.seed,
        model: ModelArgs {
            beta1: 1.5,
            associate: AssociateArg::Single,
            beta_a: 1.5,
            lambda_shape: 1.0,
            tau: 1.0,
            omega: 1.0,
        },
        output: args.output.clone(),
    };
    simulate(&sim)
}

fn joint_significance_table(args: &TableArgs) -> Result<()> {
    let family = args.copula.unwrap_or(CopulaFamily::Gumbel);
    let Some(theta) = args.theta else {
        bail!("table 5 without --input needs --theta");
    };
    let copula = CopulaModel::new(family, theta)?;
    let mut rows = Vec::new();
    for l in table5_levels() {
        let p = joint_significance(&copula, &l)?;
        rows.push(vec![
            family.name().to_string(),
            full(theta),
            full(l.alpha()),
            full(l.delta()),
            full(l.a()),
            full(l.d()),
            pct2(p),
            full(p),
        ]);
    }
    let header = ["copula", "theta", "alpha", "delta", "a", "d", "joint_sig_pct", "joint_sig"];
    emit("table", args, args.output.as_deref(), |out| {
        write_versioned_csv(out, "joint-significance", &header, &rows)
    })
}

fn audit_table(args: &TableArgs) -> Result<()> {
    let mut rows = Vec::new();
    for l in table_grid(&[0.9, 0.95], &[0.9, 0.925, 0.95], 0.1, 0.1)? {
        for theta in [0.0, 0.5, -0.5, 1.0] {
            rows.extend(audit_fgm_closed(1.5, theta, &l)?);
        }
        for n in 1..=4 {
            let m = AggregateParetoModel::new(n, 1.0, 1.5)?;
            for theta in [0.0, 0.5] {
                rows.extend(audit_aggregate_closed(&m, theta, &l)?);
            }
        }
    }
    emit("table", args, args.output.as_deref(), |out| write_audit_csv(out, &rows))
}

pub fn table(args: &TableArgs) -> Result<()> {
    match args.which {
        Which::One | Which::Two | Which::Three => simulation_table(args),
        Which::Four => {
            let Some(input) = &args.input else {
                bail!("table 4 needs --input");
            };
            let rows = garch_rows(input, Some(args.in_sample), args.innovation)?;
            emit("table", args, args.output.as_deref(), |out| {
                write_versioned_csv(out, "garch-fit", &GARCH_CSV_HEADER, &rows)
            })
        }
        Which::Five => match &args.input {
            None => joint_significance_table(args),
            Some(input) => {
                let (s, y) = load_pair(input)?;
                let opts = BacktestOptions {
                    innovation: args.innovation.into(),
                    refit_every: None,
                    fixed_theta: args.theta,
                };
                let family = args.copula.unwrap_or(CopulaFamily::Gumbel);
                let report = rolling_backtest(&s, &y, family, &table5_levels(), args.in_sample, &opts)?;
                emit("table", args, args.output.as_deref(), |out| report.write_csv(out))
            }
        },
        Which::Audit => audit_table(args),
    }
}
