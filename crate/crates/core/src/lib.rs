//! Dependent conditional value-at-risk (DCoVaR) and its relatives.
//!
//! The crate evaluates VaR, CoVaR (expected shortfall), the modified CoVaR
//! with a fixed upper loss cutoff, the copula CoVaR, and DCoVaR, which is the
//! mean of a target loss over a doubly truncated band while an associate loss
//! sits inside its own band:
//!
//! ```text
//! DCoVaR = E[S | Q_α ≤ S ≤ Q_α₁, Q_δ(Y) ≤ Y ≤ Q_δ₁(Y)]
//! α₁ = α + (1-α)^(a+1),  δ₁ = δ + (1-δ)^(d+1)
//! ```
//!
//! Modules:
//!
//! * [`dist`]: univariate loss marginals
//! * [`copula`]: FGM, Clayton, Gumbel and Frank copulas
//! * [`numerics`]: quadrature, root finding, optimisers, seeded RNG
//! * [`risk`]: the risk measures and the aggregate Pareto model
//! * [`simulate`]: seeded Monte Carlo harness and δ-sweeps
//! * [`garch`]: GARCH(1,1)-t fitting, forecasting and backtesting
//! * [`io`]: price/return ingestion and versioned CSV reports
//! * [`empirical`]: ranks, pseudo-observations and sample statistics

pub mod copula;
pub mod dist;
pub mod empirical;
pub mod error;
pub mod garch;
pub mod io;
pub mod numerics;
pub mod risk;
pub mod simulate;

pub use error::{Result, RiskError};
