use crate::error::{Error, Result};
use crate::linalg::SparseOp;
use crate::model::basis::{Basis, FullBasis};
use crate::model::drive::DriveParams;
use crate::model::geometry::ChainGeometry;

/// Default largest chain for full 2^N assembly.
pub const DEFAULT_MAX_FULL_SITES: usize = 14;

/// Diagonal energy of a product state: −Σ(Δ+Δ_A,i)n_i + Σ_{i<j} V_ij n_i n_j.
pub fn diagonal_energy(mask: u32, v: &[Vec<f64>], drive: &DriveParams) -> f64 {
    let n = v.len();
    let mut e = 0.0;
    for i in 0..n {
        if mask >> i & 1 == 0 {
            continue;
        }
        e -= drive.site_detuning(i);
        for j in (i + 1)..n {
            if mask >> j & 1 == 1 {
                e += v[i][j];
            }
        }
    }
    e
}

fn pair_table(geom: &ChainGeometry) -> Vec<Vec<f64>> {
    let n = geom.len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { geom.interaction(i, j) }).collect())
        .collect()
}

/// Pieces of the Ising Hamiltonian that scale separately with Ω and Δ, so
/// time-dependent schedules can reassemble H(Ω, Δ) cheaply.
#[derive(Debug, Clone)]
pub struct IsingTerms {
    /// ½Σσˣ_i restricted to the basis (unit Rabi frequency).
    pub drive_pattern: SparseOp,
    /// N_R of each basis state.
    pub number: Vec<f64>,
    /// Interaction energy minus addressing shifts per basis state.
    pub local: Vec<f64>,
}

impl IsingTerms {
    pub fn new<B: Basis>(geom: &ChainGeometry, addressing: &[f64], basis: &B) -> Result<Self> {
        if basis.n_sites() != geom.len() {
            return Err(Error::Validation(format!(
                "basis has {} sites but geometry has {}",
                basis.n_sites(),
                geom.len()
            )));
        }
        let addr_only = DriveParams {
            omega: 0.0,
            delta: 0.0,
            addressing: addressing.to_vec(),
        };
        addr_only.check_sites(geom.len())?;
        let v = pair_table(geom);
        let n = geom.len();
        let dim = basis.dim();
        let mut number = Vec::with_capacity(dim);
        let mut local = Vec::with_capacity(dim);
        let mut triplets = Vec::with_capacity(dim * n);
        for k in 0..dim {
            let mask = basis.state(k);
            number.push(mask.count_ones() as f64);
            local.push(diagonal_energy(mask, &v, &addr_only));
            for i in 0..n {
                if let Some(l) = basis.index_of(mask ^ (1 << i)) {
                    triplets.push((k, l, 0.5));
                }
            }
        }
        Ok(IsingTerms {
            drive_pattern: SparseOp::from_triplets(dim, triplets),
            number,
            local,
        })
    }

    pub fn assemble(&self, omega: f64, delta: f64) -> SparseOp {
        let diag: Vec<f64> = self
            .local
            .iter()
            .zip(&self.number)
            .map(|(l, n)| l - delta * n)
            .collect();
        self.drive_pattern.scaled(omega).with_added_diagonal(&diag)
    }
}

/// Exact Ising Hamiltonian on the full 2^N space.
pub fn build_ising_hamiltonian(geom: &ChainGeometry, drive: &DriveParams) -> Result<SparseOp> {
    build_ising_hamiltonian_capped(geom, drive, DEFAULT_MAX_FULL_SITES)
}

/// As [`build_ising_hamiltonian`] with an explicit site limit.
pub fn build_ising_hamiltonian_capped(
    geom: &ChainGeometry,
    drive: &DriveParams,
    max_sites: usize,
) -> Result<SparseOp> {
    if geom.len() > max_sites {
        return Err(Error::Capacity {
            what: "n_sites for full Hilbert space",
            requested: geom.len(),
            limit: max_sites,
        });
    }
    build_ising_in(geom, drive, &FullBasis::new(geom.len())?)
}

/// Ising Hamiltonian restricted to any basis. Drive matrix elements leading
/// outside the basis are dropped, which truncates capped bases.
pub fn build_ising_in<B: Basis>(
    geom: &ChainGeometry,
    drive: &DriveParams,
    basis: &B,
) -> Result<SparseOp> {
    drive.check_sites(geom.len())?;
    Ok(IsingTerms::new(geom, &drive.addressing, basis)?.assemble(drive.omega, drive.delta))
}

/// Restrict a full-space operator to the rows and columns of `basis`.
pub fn sector_project<B: Basis>(op: &SparseOp, basis: &B) -> Result<SparseOp> {
    let full = 1usize << basis.n_sites();
    if op.dim() != full {
        return Err(Error::Validation(format!(
            "operator dimension {} is not 2^{} = {full}",
            op.dim(),
            basis.n_sites()
        )));
    }
    let mut triplets = Vec::new();
    for k in 0..basis.dim() {
        let row = basis.state(k) as usize;
        for (c, v) in op.row(row) {
            if let Some(l) = basis.index_of(c as u32) {
                triplets.push((k, l, v));
            }
        }
    }
    Ok(SparseOp::from_triplets(basis.dim(), triplets))
}

/// Diagonal operator N_R = Σ n_i on a basis.
pub fn number_operator<B: Basis>(basis: &B) -> SparseOp {
    let d: Vec<f64> = (0..basis.dim()).map(|k| basis.state(k).count_ones() as f64).collect();
    SparseOp::from_diagonal(&d)
}
