use nalgebra::DMatrix;

use crate::error::{Error, ResonanceKind, Result};
use crate::linalg::SparseOp;
use crate::model::{diagonal_energy, Basis, ChainGeometry, DriveParams, SectorBasis};

/// Largest chain the dense oracle accepts.
pub const ORACLE_MAX_SITES: usize = 8;

/// Brute-force second-order Schrieffer–Wolff Hamiltonian H₀ + P(½[S, Ω_D])P
/// restricted to one excitation sector.
///
/// S is built element-wise from the defining condition [S, H₀] + Ω_D = 0,
/// which gives S_ab = (Ω_D)_ab / (E_a − E_b) in the eigenbasis of the
/// diagonal H₀. Works for arbitrary geometries and addressing shifts.
pub fn sw_oracle(geom: &ChainGeometry, drive: &DriveParams, n_excitations: usize) -> Result<(SparseOp, SectorBasis)> {
    let n = geom.len();
    if n > ORACLE_MAX_SITES {
        return Err(Error::Capacity {
            what: "n_sites for the dense oracle",
            requested: n,
            limit: ORACLE_MAX_SITES,
        });
    }
    drive.check_sites(n)?;
    let basis = SectorBasis::new(n, n_excitations)?;
    let dim = 1usize << n;
    let v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { geom.interaction(i, j) }).collect())
        .collect();
    let e: Vec<f64> = (0..dim).map(|m| diagonal_energy(m as u32, &v, drive)).collect();
    let half = 0.5 * drive.omega;
    let scale = drive.delta.abs().max(f64::MIN_POSITIVE);

    let mut omega_d = DMatrix::<f64>::zeros(dim, dim);
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    if half != 0.0 {
        for a in 0..dim {
            for i in 0..n {
                let b = a ^ (1 << i);
                let gap = e[a] - e[b];
                if gap.abs() < 1e-6 * scale {
                    return Err(Error::resonance(
                        ResonanceKind::Degenerate,
                        format!("levels {a:#b} and {b:#b} are coupled with gap {gap:e}"),
                    ));
                }
                omega_d[(a, b)] = half;
                s[(a, b)] = half / gap;
            }
        }
    }
    let m = (&s * &omega_d - &omega_d * &s) * 0.5;
    let mut t = Vec::new();
    for k in 0..basis.dim() {
        let a = basis.state(k) as usize;
        t.push((k, k, e[a]));
        for l in 0..basis.dim() {
            let b = basis.state(l) as usize;
            t.push((k, l, m[(a, b)]));
        }
    }
    Ok((SparseOp::from_triplets(basis.dim(), t), basis))
}

/// Largest element-wise deviation of `op` from `reference`, relative to each
/// reference element with a floor of 1e-12 × the largest reference element.
pub fn relative_deviation(op: &SparseOp, reference: &SparseOp) -> f64 {
    assert_eq!(op.dim(), reference.dim());
    let floor = 1e-12 * reference.max_abs();
    let mut worst: f64 = 0.0;
    for (r, c, _) in op.iter().chain(reference.iter()) {
        let (a, b) = (op.get(r, c), reference.get(r, c));
        worst = worst.max((a - b).abs() / b.abs().max(floor).max(f64::MIN_POSITIVE));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::builders::{build_effective_two_magnon_with, EffectiveOptions, Onsite};
    use crate::effective::coefficients::{coeff_j, EffectiveCoefficients};
    use crate::model::mask_from_sites;

    #[test]
    fn two_atom_exchange_element() {
        let g = ChainGeometry::default_chain(2, 5.3).unwrap();
        let d = DriveParams::from_mhz(1.2, -4.0).unwrap();
        let (h, _) = sw_oracle(&g, &d, 1).unwrap();
        let j = coeff_j(d.omega, d.delta, g.interaction(0, 1)).unwrap();
        assert!((h.get(0, 1) - j).abs() < 1e-12 * j.abs());
    }

    #[test]
    fn three_atom_pair_hop() {
        let g = ChainGeometry::default_chain(3, 5.8).unwrap();
        let d = DriveParams::from_mhz(1.0, 3.5).unwrap();
        let (h, b) = sw_oracle(&g, &d, 2).unwrap();
        let c = EffectiveCoefficients::new(&g, &d).unwrap();
        let x = b.rank(mask_from_sites(&[0, 2])).unwrap();
        let y = b.rank(mask_from_sites(&[0, 1])).unwrap();
        let q = c.q(1, 2, 0);
        assert!((h.get(x, y) - q).abs() < 1e-12 * q.abs());
        let (e, _) = build_effective_two_magnon_with(&g, &d, &EffectiveOptions::default().with_onsite(Onsite::Exact)).unwrap();
        assert!(relative_deviation(&e, &h) < 1e-10);
    }

    #[test]
    fn zero_drive_gives_bare_energies() {
        let g = ChainGeometry::default_chain(4, 6.0).unwrap();
        let d = DriveParams::new(0.0, 3.0).unwrap();
        let (h, _) = sw_oracle(&g, &d, 2).unwrap();
        assert!(h.iter().all(|(r, c, _)| r == c));
    }

    #[test]
    fn facilitation_is_degenerate() {
        let g = ChainGeometry::uniform_chain(2, 1.0, 5.0).unwrap();
        let d = DriveParams::new(1.0, 5.0).unwrap();
        let err = sw_oracle(&g, &d, 1).unwrap_err();
        assert!(matches!(err, Error::Resonance { kind: ResonanceKind::Degenerate, .. }));
    }
}
