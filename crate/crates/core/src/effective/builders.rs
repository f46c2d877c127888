use std::collections::VecDeque;

use crate::effective::coefficients::EffectiveCoefficients;
use crate::error::{Error, Result};
use crate::linalg::SparseOp;
use crate::model::{Basis, ChainGeometry, DriveParams, SectorBasis};

/// Which single-magnon potential to place on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Onsite {
    /// No on-site term (the two-magnon default).
    #[default]
    Omit,
    /// Only the non-uniform part μ_i − mean(μ).
    NonUniform,
    /// The full μ_i.
    Mu,
    /// μ_i plus the sector constant δ(N − 4N_R), reproducing H₀ + H⁽²⁾ exactly.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EffectiveOptions {
    pub onsite: Onsite,
    /// Keep interactions only between sites at most this many chain indices apart.
    pub interaction_range: Option<usize>,
    /// Drop hops that change the nearest-neighbour bond number N_RR.
    pub conserve_bonds: bool,
}

impl EffectiveOptions {
    pub fn with_onsite(mut self, onsite: Onsite) -> Self {
        self.onsite = onsite;
        self
    }

    /// Nearest-neighbour interactions with bond-number conservation.
    pub fn nearest_neighbour() -> Self {
        EffectiveOptions {
            onsite: Onsite::Omit,
            interaction_range: Some(1),
            conserve_bonds: true,
        }
    }
}

pub(crate) fn coefficients_for(
    geom: &ChainGeometry,
    drive: &DriveParams,
    opts: &EffectiveOptions,
) -> Result<EffectiveCoefficients> {
    let v = geom.interaction_matrix();
    let v = match opts.interaction_range {
        Some(r) => v.truncated(r),
        None => v,
    };
    EffectiveCoefficients::from_interactions(&v, drive)
}

/// Number of adjacent excited pairs Σ_i n_i n_{i+1}.
pub fn bond_number(mask: u32) -> u32 {
    (mask & (mask >> 1)).count_ones()
}

fn onsite_shift(c: &EffectiveCoefficients, onsite: Onsite, site: usize) -> f64 {
    match onsite {
        Onsite::Omit => 0.0,
        Onsite::NonUniform => c.mu(site) - c.mean_mu(),
        Onsite::Mu | Onsite::Exact => c.mu(site),
    }
}

// Each ground-state atom is light shifted by +δ and each excited one by −δ,
// so H₀ + H⁽²⁾ carries δ(N − 2N_R) besides the 2δ already inside every μ_i.
fn constant_shift(c: &EffectiveCoefficients, onsite: Onsite, n_excitations: usize) -> f64 {
    match onsite {
        Onsite::Exact => (c.len() as f64 - 4.0 * n_excitations as f64) * c.delta_ls(),
        _ => 0.0,
    }
}

fn sites(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let s = m.trailing_zeros() as usize;
            m &= m - 1;
            s
        })
    })
}

fn push_hop(
    t: &mut Vec<(usize, usize, f64)>,
    basis: &SectorBasis,
    k: usize,
    from: u32,
    to: u32,
    amp: f64,
    conserve_bonds: bool,
) {
    if amp == 0.0 || (conserve_bonds && bond_number(from) != bond_number(to)) {
        return;
    }
    let l = basis.rank(to).expect("hop stays in sector");
    t.push((k, l, amp));
}

/// XY model of a single magnon: J_ij hops and the on-site term selected by `opts.onsite`.
pub fn build_effective_single_magnon_with(
    geom: &ChainGeometry,
    drive: &DriveParams,
    opts: &EffectiveOptions,
) -> Result<(SparseOp, SectorBasis)> {
    let c = coefficients_for(geom, drive, opts)?;
    let n = c.len();
    let basis = SectorBasis::new(n, 1)?;
    let mut t = Vec::with_capacity(n * n);
    let shift = constant_shift(&c, opts.onsite, 1);
    for a in 0..n {
        t.push((a, a, onsite_shift(&c, opts.onsite, a) + shift));
        for b in 0..n {
            if a != b {
                push_hop(&mut t, &basis, a, 1 << a, 1 << b, c.j(a, b), opts.conserve_bonds);
            }
        }
    }
    Ok((SparseOp::from_triplets(n, t), basis))
}

/// Default options for the single-magnon builder: full μ_i on the diagonal.
pub fn single_magnon_default() -> EffectiveOptions {
    EffectiveOptions::default().with_onsite(Onsite::Mu)
}

/// N×N hopping matrix with J_ij off the diagonal and μ_i on it.
pub fn build_effective_single_magnon(geom: &ChainGeometry, drive: &DriveParams) -> Result<SparseOp> {
    Ok(build_effective_single_magnon_with(geom, drive, &single_magnon_default())?.0)
}

/// Two-magnon Hamiltonian: hops i ↔ j with amplitude Q_ijk while the other
/// magnon sits at k, plus U_ij on the diagonal.
pub fn build_effective_two_magnon_with(
    geom: &ChainGeometry,
    drive: &DriveParams,
    opts: &EffectiveOptions,
) -> Result<(SparseOp, SectorBasis)> {
    let c = coefficients_for(geom, drive, opts)?;
    let n = c.len();
    let basis = SectorBasis::new(n, 2)?;
    let shift = constant_shift(&c, opts.onsite, 2);
    let mut t = Vec::new();
    for k in 0..basis.dim() {
        let mask = basis.state(k);
        let (a, b) = (mask.trailing_zeros() as usize, 31 - mask.leading_zeros() as usize);
        let diag = c.u(a, b)
            + onsite_shift(&c, opts.onsite, a)
            + onsite_shift(&c, opts.onsite, b)
            + shift;
        t.push((k, k, diag));
        for (mover, spectator) in [(a, b), (b, a)] {
            for dest in 0..n {
                if mask >> dest & 1 == 1 {
                    continue;
                }
                let to = mask & !(1 << mover) | 1 << dest;
                push_hop(&mut t, &basis, k, mask, to, c.q(mover, dest, spectator), opts.conserve_bonds);
            }
        }
    }
    Ok((SparseOp::from_triplets(basis.dim(), t), basis))
}

pub fn build_effective_two_magnon(geom: &ChainGeometry, drive: &DriveParams) -> Result<SparseOp> {
    Ok(build_effective_two_magnon_with(geom, drive, &EffectiveOptions::default())?.0)
}

/// Second-order effective Hamiltonian H₀ + H⁽²⁾ in any N_R sector, keeping
/// one-, two- and three-body terms and dropping the cubic density term.
///
/// A hop i ↔ j carries J_ij + Σ_k (Q_ijk − J_ij) over the other excited
/// sites k. In the one- and two-magnon sectors this coincides with the
/// dedicated builders under [`Onsite::Exact`].
pub fn build_effective_sector(
    geom: &ChainGeometry,
    drive: &DriveParams,
    n_excitations: usize,
    opts: &EffectiveOptions,
) -> Result<(SparseOp, SectorBasis)> {
    let c = coefficients_for(geom, drive, opts)?;
    let n = c.len();
    let basis = SectorBasis::new(n, n_excitations)?;
    let nr = n_excitations as f64;
    let mut t = Vec::new();
    for k in 0..basis.dim() {
        let mask = basis.state(k);
        let occ: Vec<usize> = sites(mask).collect();
        // H₀ plus the single-atom light shifts
        let mut diag = -c.detuning() * nr + c.delta_ls() * (n as f64 - 2.0 * nr);
        for (x, &a) in occ.iter().enumerate() {
            // −Σ_{i≠j} J_ij σᶻ_i n_j, linear part
            diag += c.j_matrix().row(a).sum();
            for &b in &occ[x + 1..] {
                diag += c.u(a, b);
            }
        }
        t.push((k, k, diag));
        for &a in &occ {
            for dest in 0..n {
                if mask >> dest & 1 == 1 {
                    continue;
                }
                let mut amp = c.j(a, dest);
                for &s in &occ {
                    if s != a {
                        amp += c.q(a, dest, s) - c.j(a, dest);
                    }
                }
                let to = mask & !(1 << a) | 1 << dest;
                push_hop(&mut t, &basis, k, mask, to, amp, opts.conserve_bonds);
            }
        }
    }
    Ok((SparseOp::from_triplets(basis.dim(), t), basis))
}

/// Dimension of the Krylov subspace reachable from one basis state, found by
/// breadth-first search over nonzero off-diagonal couplings.
pub fn krylov_dimension(op: &SparseOp, start: usize) -> usize {
    let mut seen = vec![false; op.dim()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 0;
    while let Some(r) = queue.pop_front() {
        count += 1;
        for (c, v) in op.row(r) {
            if v != 0.0 && !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    count
}

/// Krylov dimension of a product state given as a mask within a sector basis.
pub fn krylov_dimension_of(op: &SparseOp, basis: &SectorBasis, mask: u32) -> Result<usize> {
    let start = basis
        .rank(mask)
        .ok_or_else(|| Error::Validation(format!("mask {mask:#b} not in sector")))?;
    Ok(krylov_dimension(op, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;
    use crate::model::mask_from_sites;
    use crate::units::mhz_to_angular;

    fn chain(n: usize, a: f64) -> ChainGeometry {
        ChainGeometry::default_chain(n, a).unwrap()
    }

    #[test]
    fn two_site_splitting_is_twice_exchange() {
        let g = chain(2, 5.5);
        let d = DriveParams::from_mhz(1.5, -4.0).unwrap();
        let h = build_effective_single_magnon(&g, &d).unwrap();
        let e = eigh(h.to_dense()).values;
        let j = EffectiveCoefficients::new(&g, &d).unwrap().j(0, 1);
        assert!(((e[1] - e[0]) - 2.0 * j.abs()).abs() < 1e-12 * j.abs());
    }

    #[test]
    fn spectator_hop_element() {
        let g = chain(3, 6.0);
        let d = DriveParams::from_mhz(1.0, -3.0).unwrap();
        let (h, b) = build_effective_two_magnon_with(&g, &d, &EffectiveOptions::default()).unwrap();
        let c = EffectiveCoefficients::new(&g, &d).unwrap();
        // |↑↓↑⟩ ↔ |↑↑↓⟩: magnon hops between sites 2 and 1 (0-based) with site 0 excited
        let from = b.rank(mask_from_sites(&[0, 2])).unwrap();
        let to = b.rank(mask_from_sites(&[0, 1])).unwrap();
        assert_eq!(h.get(from, to), c.q(1, 2, 0));
        assert_eq!(h.get(to, from), c.q(1, 2, 0));
    }

    #[test]
    fn general_sector_matches_dedicated_builders() {
        let g = chain(6, 5.2);
        let d = DriveParams::from_mhz(1.7, -5.0).unwrap();
        let exact = EffectiveOptions::default().with_onsite(Onsite::Exact);
        let (a, _) = build_effective_sector(&g, &d, 1, &exact).unwrap();
        let (b, _) = build_effective_single_magnon_with(&g, &d, &exact).unwrap();
        let (c, _) = build_effective_sector(&g, &d, 2, &exact).unwrap();
        let (e, _) = build_effective_two_magnon_with(&g, &d, &exact).unwrap();
        for (x, y) in [(a, b), (c, e)] {
            let diff = (x.to_dense() - y.to_dense()).amax();
            assert!(diff < 1e-12 * x.max_abs(), "{diff}");
        }
    }

    #[test]
    fn nn_truncated_pair_is_frozen() {
        let g = chain(6, 7.0);
        let d = DriveParams::from_mhz(2.54, -3.3).unwrap();
        let (h, b) = build_effective_two_magnon_with(&g, &d, &EffectiveOptions::nearest_neighbour()).unwrap();
        assert_eq!(krylov_dimension_of(&h, &b, mask_from_sites(&[2, 3])).unwrap(), 1);
        // separated magnons still move
        assert!(krylov_dimension_of(&h, &b, mask_from_sites(&[0, 3])).unwrap() > 1);
    }

    #[test]
    fn addressing_is_rejected() {
        let g = chain(3, 6.0);
        let d = DriveParams::from_mhz(1.0, -3.0).unwrap().with_addressing(vec![mhz_to_angular(1.0)]);
        assert!(matches!(build_effective_single_magnon(&g, &d), Err(Error::Validation(_))));
    }

    #[test]
    fn bond_numbers() {
        assert_eq!(bond_number(0b0110), 1);
        assert_eq!(bond_number(0b0101), 0);
        assert_eq!(bond_number(0b0111), 2);
    }

    #[test]
    fn builders_are_hermitian_and_block_built() {
        let g = chain(6, 6.1);
        let d = DriveParams::from_mhz(2.0, 7.0).unwrap();
        for nr in 0..=6 {
            let (h, b) = build_effective_sector(&g, &d, nr, &EffectiveOptions::default()).unwrap();
            assert_eq!(h.dim(), b.dim());
            assert_eq!(h.max_asymmetry(), 0.0);
        }
        let (h2, _) = build_effective_two_magnon_with(&g, &d, &EffectiveOptions::default()).unwrap();
        assert_eq!(h2.max_asymmetry(), 0.0);
    }
}
