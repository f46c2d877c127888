//! Geometry, drive, basis enumeration and the exact Rydberg Ising Hamiltonian
//! H = (Ω/2)Σσˣ_i − Σ(Δ+Δ_A,i)n_i + Σ_{i<j} V_ij n_i n_j.

pub mod basis;
pub mod drive;
pub mod geometry;
pub mod ising;

pub use basis::{
    binomial, bits_to_mask, mask_from_sites, mask_to_bits, Basis, CappedBasis, FullBasis,
    ModelSpace, SectorBasis, MAX_BASIS_SITES,
};
pub use drive::DriveParams;
pub use geometry::{vdw_interaction, ChainGeometry, InteractionMatrix};
pub use ising::{
    build_ising_hamiltonian, build_ising_hamiltonian_capped, build_ising_in, diagonal_energy,
    number_operator, sector_project, IsingTerms, DEFAULT_MAX_FULL_SITES,
};
