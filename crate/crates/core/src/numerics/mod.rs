//! Shared numerical kernels: adaptive quadrature, bracketed root finding,
//! bounded and simplex optimisation, and the seeded generator contract.

mod optimize;
mod quadrature;
mod rng;
mod roots;

pub use optimize::{maximize_1d, minimize_simplex, SimplexResult};
pub use quadrature::{integrate_1d, integrate_2d, QuadratureSpec, Rect};
pub use rng::{exponential, open_unit, RngContract, SimRng, RNG_ALGORITHM};
pub use roots::{brent, find_root, Root};
