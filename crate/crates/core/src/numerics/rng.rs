//! The one random-number source used by every sampler in the crate.
//!
//! Streams come from ChaCha8 (`rand_chacha`), whose output is fixed by the
//! seed alone and identical on every platform. Independent sub-streams (one
//! per grid cell, per scenario, ...) are derived with [`RngContract::split`],
//! so work can be reordered or parallelised without changing any draw.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Concrete generator type handed to samplers.
pub type SimRng = ChaCha8Rng;

/// Identifier recorded in run sidecars.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngContract {
    pub seed: u64,
}

impl RngContract {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn generator(&self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Derives the contract for sub-stream `index`.
    pub fn split(&self, index: u64) -> RngContract {
        let mixed = splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)));
        RngContract { seed: mixed }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard exponential draw.
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -open_unit(rng).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_42_golden_stream() {
        let mut rng = RngContract::new(42).generator();
        let got: Vec<u64> = (0..8).map(|_| rng.next_u64()).collect();
        assert_eq!(got, GOLDEN_42);
    }

    // Frozen from rand_chacha 0.3; a change here breaks every stored seed.
    const GOLDEN_42: [u64; 8] = [
        12578764544318200737,
        17529487244874322312,
        7886285670807131020,
        11572758976476374866,
        5323617429756461744,
        2766252901828231838,
        5682345367224914708,
        14828835203913492612,
    ];

    #[test]
    fn open_unit_stays_inside() {
        let mut rng = RngContract::new(1).generator();
        for _ in 0..10_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn split_streams_differ_and_repeat() {
        let base = RngContract::new(7);
        assert_ne!(base.split(0), base.split(1));
        assert_eq!(base.split(3), base.split(3));
        let a: Vec<u64> = {
            let mut r = base.split(2).generator();
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = base.split(2).generator();
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }
}
