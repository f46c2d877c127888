//! Rydberg-dressed spin chains: the driven Ising model, its perturbative
//! spin-exchange limit, two-magnon spectra, open-system dynamics and the
//! readout chain.

// `!(x > 0.0)` also rejects NaN; site loops index several arrays by bit position
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod effective;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod model;
pub mod observables;
pub mod presets;
pub mod rng;
pub mod spectra;
pub mod units;

pub use error::{Error, ResonanceKind, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
