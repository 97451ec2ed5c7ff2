//! Cooling a finite-dimensional quantum target with collision models that
//! carry memory.
//!
//! The target `S` collides with `k` identical machines per step. Of these,
//! `ell` are kept as memory carriers (`L`) and the remaining `k - ell` are
//! fresh thermal reset machines (`R`) that are discarded after the step.
//! Grouping `S` with `L` gives a Markovian process on `SL`, which is what the
//! engine simulates.
//!
//! Every state handled here is diagonal in the product energy basis, so a
//! state is a probability vector and every unitary is a permutation of its
//! entries.
//!
//! Flat indices are lexicographic over factors with the leftmost factor most
//! significant: an `SLR` entry `(mu, nu, omega)` lives at
//! `mu * d_L * d_R + nu * d_R + omega`.

pub mod analysis;
pub mod asymptotics;
pub mod engine;
mod error;
pub mod majorize;
pub mod nonadaptive;
pub mod spectra;

pub use error::{Error, Result};
pub use spectra::{DiagonalState, EnergySpectrum, MemoryConfig};

/// Absolute tolerance on the total probability of any distribution.
pub const NORM_TOL: f64 = 1e-12;

/// Largest `d_S * d_M^k` the engine agrees to simulate.
pub const MAX_JOINT_DIM: u128 = 10_000_000;
