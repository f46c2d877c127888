//! Second-order Schrieffer–Wolff coefficients and sector-resolved effective
//! Hamiltonians of the dressed chain.

pub mod anisotropy;
pub mod builders;
pub mod coefficients;
pub mod oracle;

pub use anisotropy::{anisotropies, anisotropies_from, AnisotropyReport};
pub use builders::{
    bond_number, build_effective_sector, build_effective_single_magnon,
    build_effective_single_magnon_with, build_effective_two_magnon, build_effective_two_magnon_with,
    krylov_dimension, krylov_dimension_of, single_magnon_default, EffectiveOptions, Onsite,
};
pub use coefficients::{
    coeff_delta, coeff_g, coeff_j, dressing_potential, dressing_radius, EffectiveCoefficients,
    RESONANCE_TOLERANCE,
};
pub use oracle::{relative_deviation, sw_oracle, ORACLE_MAX_SITES};
