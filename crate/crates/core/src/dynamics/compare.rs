//! Direct comparison of the effective sector dynamics with the full Ising model.

use nalgebra::DVector;

use crate::dynamics::unitary::evolve_unitary;
use crate::effective::{build_effective_sector, EffectiveOptions, Onsite};
use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64};
use crate::model::{build_ising_hamiltonian, Basis, ChainGeometry, DriveParams};

/// Largest chain compared against the full 2^N propagator.
pub const COMPARE_MAX_SITES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SectorComparison {
    pub times: Vec<f64>,
    /// |⟨φ_eff(t)|P ψ(t)⟩|² / ‖P ψ(t)‖², with P the projector on the sector.
    pub overlaps: Vec<f64>,
    /// ‖P ψ(t)‖², the weight left in the starting sector.
    pub retention: Vec<f64>,
}

impl SectorComparison {
    pub fn min_overlap(&self) -> f64 {
        self.overlaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Quench both models from the product state `start` and compare the
/// sector-projected exact state with the effective one.
///
/// The effective side uses [`Onsite::Exact`] so that relative phases between
/// configurations with different on-site energies are kept.
pub fn compare_with_exact(
    geom: &ChainGeometry,
    drive: &DriveParams,
    start: u32,
    times: &[f64],
) -> Result<SectorComparison> {
    let n = geom.len();
    if n > COMPARE_MAX_SITES {
        return Err(Error::Capacity {
            what: "n_sites",
            requested: n,
            limit: COMPARE_MAX_SITES,
        });
    }
    let n_r = start.count_ones() as usize;
    let opts = EffectiveOptions::default().with_onsite(Onsite::Exact);
    let (eff, basis) = build_effective_sector(geom, drive, n_r, &opts)?;
    let k0 = basis
        .index_of(start)
        .ok_or_else(|| Error::Validation(format!("start mask {start:#b} outside a {n}-site chain")))?;
    let exact = build_ising_hamiltonian(geom, drive)?;

    let psi = evolve_unitary(&exact, &unit(1 << n, start as usize), times)?;
    let phi = evolve_unitary(&eff, &unit(basis.dim(), k0), times)?;
    let mut overlaps = Vec::with_capacity(times.len());
    let mut retention = Vec::with_capacity(times.len());
    for (full, reduced) in psi.states.iter().zip(&phi.states) {
        let p: StateVector = DVector::from_iterator(basis.dim(), basis.masks().iter().map(|&m| full[m as usize]));
        let w = p.norm_squared();
        retention.push(w);
        overlaps.push(if w > 0.0 { reduced.dotc(&p).norm_sqr() / w } else { 0.0 });
    }
    Ok(SectorComparison {
        times: times.to_vec(),
        overlaps,
        retention,
    })
}

fn unit(dim: usize, k: usize) -> StateVector {
    let mut v = DVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mask_from_sites;

    #[test]
    fn starts_with_unit_overlap() {
        let g = ChainGeometry::default_chain(3, 6.0).unwrap();
        let d = DriveParams::from_mhz(1.0, -5.0).unwrap();
        let c = compare_with_exact(&g, &d, mask_from_sites(&[1]), &[0.0]).unwrap();
        assert!((c.overlaps[0] - 1.0).abs() < 1e-12);
        assert!((c.retention[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_many_sites_rejected() {
        let g = ChainGeometry::default_chain(13, 6.0).unwrap();
        let d = DriveParams::from_mhz(1.0, -5.0).unwrap();
        assert!(matches!(compare_with_exact(&g, &d, 1, &[0.0]), Err(Error::Capacity { .. })));
    }
}
