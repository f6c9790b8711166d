use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcovar_core::copula::CopulaFamily;
use dcovar_core::garch::Innovation;
use dcovar_core::risk::Tail;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "dcovar", version, about = "Dependent conditional value-at-risk toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo violation study over an α × δ grid.
    Simulate(SimulateArgs),
    /// DCoVaR and MCoVaR against δ.
    Curve(CurveArgs),
    /// GARCH(1,1)-t fit of every loss series in a file.
    GarchFit(GarchFitArgs),
    /// Copula fit on GARCH-standardized residuals.
    CopulaFit(CopulaFitArgs),
    /// One-step-ahead DCoVaR forecast.
    Forecast(ForecastArgs),
    /// Out-of-sample violation backtest.
    Backtest(BacktestArgs),
    /// Regenerates one of the study tables.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AssociateArg {
    /// Pareto associate.
    Single,
    /// Two-term aggregate of Pareto losses.
    Aggregate,
    /// Gamma-distributed Pareto parameter.
    Parameter,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InnovationArg {
    Standardized,
    Raw,
}

impl From<InnovationArg> for Innovation {
    fn from(a: InnovationArg) -> Self {
        match a {
            InnovationArg::Standardized => Innovation::Standardized,
            InnovationArg::Raw => Innovation::Raw,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailArg {
    Upper,
    Lower,
}

impl From<TailArg> for Tail {
    fn from(a: TailArg) -> Self {
        match a {
            TailArg::Upper => Tail::Upper,
            TailArg::Lower => Tail::Lower,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Scale of the Pareto target.
    #[arg(long, default_value_t = 1.5)]
    pub beta1: f64,
    /// Associate law.
    #[arg(long, value_enum, default_value_t = AssociateArg::Single)]
    pub associate: AssociateArg,
    /// Scale of the Pareto associate; rate of Λ in aggregate mode.
    #[arg(long, default_value_t = 1.5)]
    pub beta_a: f64,
    /// Shape of Λ in aggregate mode.
    #[arg(long, default_value_t = 1.0)]
    pub lambda_shape: f64,
    /// Gamma shape of Λ in parameter mode.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Gamma scale of Λ in parameter mode.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value = "clayton")]
    pub copula: CopulaFamily,
    #[arg(long, default_value_t = 7.0)]
    pub theta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.95])]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.925, 0.95])]
    pub delta: Vec<f64>,
    #[arg(long = "a", default_value_t = 0.1)]
    pub a: f64,
    #[arg(long = "d", default_value_t = 0.1)]
    pub d: f64,
    /// Draws per grid cell.
    #[arg(long = "n", default_value_t = 3000)]
    pub n_obs: usize,
    #[arg(long, env = "DCOVAR_SEED", default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output CSV; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long, default_value = "clayton")]
    pub copula: CopulaFamily,
    #[arg(long, default_value_t = 7.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    #[arg(long = "a", default_value_t = 0.1)]
    pub a: f64,
    #[arg(long = "d", default_value_t = 0.1)]
    pub d: f64,
    #[arg(long, default_value_t = 0.9)]
    pub delta_from: f64,
    #[arg(long, default_value_t = 0.95)]
    pub delta_to: f64,
    #[arg(long, default_value_t = 51)]
    pub points: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GarchFitArgs {
    /// CSV with `date,price…` or `date,loss…` columns.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InnovationArg::Standardized)]
    pub innovation: InnovationArg,
    /// Fit on the first `k` losses only.
    #[arg(long)]
    pub in_sample: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CopulaFitArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Family to fit; all families when absent.
    #[arg(long)]
    pub copula: Option<CopulaFamily>,
    #[arg(long, value_enum, default_value_t = InnovationArg::Standardized)]
    pub innovation: InnovationArg,
    #[arg(long)]
    pub in_sample: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ForecastArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value = "gumbel")]
    pub copula: CopulaFamily,
    /// Fixed copula parameter; fitted when absent.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long = "a", default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long = "d", default_value_t = 0.0)]
    pub d: f64,
    #[arg(long, value_enum, default_value_t = TailArg::Lower)]
    pub tail: TailArg,
    #[arg(long, value_enum, default_value_t = InnovationArg::Standardized)]
    pub innovation: InnovationArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BacktestArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value = "gumbel")]
    pub copula: CopulaFamily,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub in_sample: usize,
    /// Refit every `k` out-of-sample days; frozen when absent.
    #[arg(long)]
    pub refit_every: Option<usize>,
    /// α grid; the four table cells when both grids are absent.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    #[arg(long = "a", default_value_t = 0.0)]
    pub a: f64,
    #[arg(long = "d", default_value_t = 0.0)]
    pub d: f64,
    #[arg(long, value_enum, default_value_t = TailArg::Lower)]
    pub tail: TailArg,
    #[arg(long, value_enum, default_value_t = InnovationArg::Standardized)]
    pub innovation: InnovationArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the per-day forecasts here.
    #[arg(long)]
    pub forecasts: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Which {
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Three,
    #[value(name = "4")]
    #[serde(rename = "4")]
    Four,
    #[value(name = "5")]
    #[serde(rename = "5")]
    Five,
    /// Closed-form deviation report.
    #[value(name = "audit")]
    #[serde(rename = "audit")]
    Audit,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    /// Overrides the table's copula family.
    #[arg(long)]
    pub copula: Option<CopulaFamily>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Loss data for tables 4 and 5.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long = "n", default_value_t = 3000)]
    pub n_obs: usize,
    #[arg(long, env = "DCOVAR_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub in_sample: usize,
    #[arg(long, value_enum, default_value_t = InnovationArg::Standardized)]
    pub innovation: InnovationArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
