//! Master equation dρ/dt = −i[H,ρ] + Σ_k (L_kρL_k† − ½{L_k†L_k, ρ}) with
//! L_j = √(γ_ind/2) n_j and L_0 = √(γ_col/2) Σ_j n_j.
//!
//! Both dephasing channels are diagonal in the computational basis, so their
//! dissipator acts elementwise: ρ_ab decays at
//! Γ_ab = (γ_ind/4)·popcount(a⊕b) + (γ_col/4)(N_a − N_b)².

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use super::unitary::{check_times, EvolutionResult};
use crate::error::{Error, Result};
use crate::linalg::{require_hermitian, DensityMatrix, SparseOp, C64};
use crate::model::Basis;

/// Trace drift that triggers a step-size retry.
pub const TRACE_REJECT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrator {
    /// Fixed-step RK4 with h = step_factor / max(‖H‖, Γ_max).
    Rk4 { step_factor: f64 },
    /// Truncated Taylor series of exp(hL) with h‖L‖ ≤ theta.
    Taylor { theta: f64 },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Taylor { theta: 4.0 }
    }
}

impl Integrator {
    pub fn rk4() -> Self {
        Integrator::Rk4 { step_factor: 0.01 }
    }
}

/// Generator L of the master equation on a fixed basis.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    h: SparseOp,
    gamma: DMatrix<f64>,
    decay_rate: f64,
    /// Per site, the (from, to) index pairs connected by its σ⁻ jump.
    jumps: Vec<Vec<(usize, usize)>>,
    decay_count: Vec<f64>,
    norm_bound: f64,
}

impl Lindbladian {
    pub fn new<B: Basis>(h: &SparseOp, basis: &B, noise: &NoiseModel) -> Result<Self> {
        noise.validate()?;
        require_hermitian(h)?;
        if basis.dim() != h.dim() {
            return Err(Error::Validation(format!(
                "basis dimension {} does not match operator dimension {}",
                basis.dim(),
                h.dim()
            )));
        }
        let masks = basis.states();
        let n = masks.len();
        let gamma = DMatrix::from_fn(n, n, |a, b| {
            let flips = (masks[a] ^ masks[b]).count_ones() as f64;
            let dn = masks[a].count_ones() as f64 - masks[b].count_ones() as f64;
            0.25 * noise.gamma_ind * flips + 0.25 * noise.gamma_col * dn * dn
        });
        let damping = noise.amplitude_damping && noise.t1_rydberg.is_finite();
        let decay_rate = if damping { 1.0 / noise.t1_rydberg } else { 0.0 };
        let mut jumps = Vec::new();
        let mut decay_count = vec![0.0; n];
        if damping {
            for site in 0..basis.n_sites() {
                let bit = 1u32 << site;
                let mut pairs = Vec::new();
                for (a, &m) in masks.iter().enumerate() {
                    if m & bit != 0 {
                        decay_count[a] += 1.0;
                        if let Some(b) = basis.index_of(m ^ bit) {
                            pairs.push((a, b));
                        }
                    }
                }
                jumps.push(pairs);
            }
        }
        Ok(Self::assemble(h, gamma, decay_rate, jumps, decay_count))
    }

    /// Coherent evolution plus an arbitrary elementwise decay matrix Γ_ab.
    pub fn from_dephasing(h: &SparseOp, gamma: DMatrix<f64>) -> Result<Self> {
        require_hermitian(h)?;
        if gamma.nrows() != h.dim() || gamma.ncols() != h.dim() {
            return Err(Error::Validation("dephasing matrix does not match operator dimension".into()));
        }
        let n = h.dim();
        Ok(Self::assemble(h, gamma, 0.0, Vec::new(), vec![0.0; n]))
    }

    fn assemble(
        h: &SparseOp,
        gamma: DMatrix<f64>,
        decay_rate: f64,
        jumps: Vec<Vec<(usize, usize)>>,
        decay_count: Vec<f64>,
    ) -> Self {
        let n = h.dim();
        // A constant diagonal shift commutes with ρ and tightens the bound.
        let diag = h.diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &d| (l.min(d), u.max(d)));
        let centre = if n > 0 { 0.5 * (lo + hi) } else { 0.0 };
        let h = h.with_added_diagonal(&vec![-centre; n]);
        let gamma_max = gamma.iter().fold(0.0f64, |m, &g| m.max(g));
        let damp_max = decay_count.iter().fold(0.0f64, |m, &c| m.max(c)) * decay_rate;
        let norm_bound = 2.0 * h.spectral_bound() + gamma_max + 2.0 * damp_max;
        Lindbladian {
            h,
            gamma,
            decay_rate,
            jumps,
            decay_count,
            norm_bound,
        }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// Upper bound on the operator norm of L.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Largest elementwise dephasing rate.
    pub fn max_dephasing(&self) -> f64 {
        self.gamma.iter().fold(0.0f64, |m, &g| m.max(g))
    }

    pub(crate) fn hamiltonian_bound(&self) -> f64 {
        self.h.spectral_bound()
    }

    /// out = L(ρ).
    pub fn apply(&self, rho: &DensityMatrix, out: &mut DensityMatrix) {
        let mut scratch = DMatrix::zeros(self.dim(), self.dim());
        self.apply_with(rho, out, &mut scratch);
    }

    fn apply_with(&self, rho: &DensityMatrix, out: &mut DensityMatrix, hr: &mut DensityMatrix) {
        let n = self.dim();
        self.h.mul_dense(rho, hr);
        // −i(Hρ − ρH) with ρH = (Hρ)† for Hermitian ρ and real symmetric H.
        for b in 0..n {
            for a in 0..n {
                let x = hr[(a, b)];
                let y = hr[(b, a)];
                let g = self.gamma[(a, b)];
                let r = rho[(a, b)];
                out[(a, b)] = C64::new(x.im + y.im - g * r.re, y.re - x.re - g * r.im);
            }
        }
        if self.decay_rate > 0.0 {
            let k = self.decay_rate;
            for b in 0..n {
                for a in 0..n {
                    out[(a, b)] -= rho[(a, b)] * (0.5 * k * (self.decay_count[a] + self.decay_count[b]));
                }
            }
            for pairs in &self.jumps {
                for &(a, a2) in pairs {
                    for &(b, b2) in pairs {
                        out[(a2, b2)] += rho[(a, b)] * k;
                    }
                }
            }
        }
    }

    fn taylor_step(&self, rho: &DensityMatrix, h: f64) -> DensityMatrix {
        let n = self.dim();
        let mut sum = rho.clone();
        let mut term = rho.clone();
        let mut next = DMatrix::zeros(n, n);
        let mut scratch = DMatrix::zeros(n, n);
        let size = |m: &DensityMatrix| m.iter().fold(0.0f64, |acc, z| acc.max(z.re.abs() + z.im.abs()));
        let scale = size(rho).max(f64::MIN_POSITIVE);
        for k in 1..=80 {
            self.apply_with(&term, &mut next, &mut scratch);
            std::mem::swap(&mut term, &mut next);
            let f = h / k as f64;
            term.iter_mut().for_each(|z| *z *= f);
            sum += &term;
            if size(&term) < 1e-17 * scale {
                break;
            }
        }
        hermitize(&mut sum);
        sum
    }

    fn rk4_step(&self, rho: &DensityMatrix, h: f64) -> DensityMatrix {
        let n = self.dim();
        let mut k1 = DMatrix::zeros(n, n);
        let mut k2 = DMatrix::zeros(n, n);
        let mut k3 = DMatrix::zeros(n, n);
        let mut k4 = DMatrix::zeros(n, n);
        let half = C64::new(0.5 * h, 0.0);
        self.apply(rho, &mut k1);
        self.apply(&(rho + &k1 * half), &mut k2);
        self.apply(&(rho + &k2 * half), &mut k3);
        self.apply(&(rho + &k3 * C64::new(h, 0.0)), &mut k4);
        let mut out = rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        hermitize(&mut out);
        out
    }

    fn max_step(&self, integrator: Integrator) -> f64 {
        match integrator {
            Integrator::Taylor { theta } => theta / self.norm_bound.max(f64::MIN_POSITIVE),
            Integrator::Rk4 { step_factor } => {
                step_factor / self.hamiltonian_bound().max(self.max_dephasing()).max(f64::MIN_POSITIVE)
            }
        }
    }

    /// Advance ρ by `t` using equal substeps no longer than `h_max`.
    fn advance(&self, rho: &DensityMatrix, t: f64, h_max: f64, integrator: Integrator) -> (DensityMatrix, f64) {
        if t <= 0.0 {
            return (rho.clone(), 0.0);
        }
        let steps = (t / h_max).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let mut r = rho.clone();
        let mut drift = 0.0f64;
        let tr0 = r.trace().re;
        for _ in 0..steps {
            r = match integrator {
                Integrator::Taylor { .. } => self.taylor_step(&r, h),
                Integrator::Rk4 { .. } => self.rk4_step(&r, h),
            };
            drift = drift.max((r.trace().re - tr0).abs());
        }
        (r, drift)
    }
}

fn hermitize(m: &mut DensityMatrix) {
    let n = m.nrows();
    for a in 0..n {
        m[(a, a)].im = 0.0;
        for b in (a + 1)..n {
            let avg = 0.5 * (m[(a, b)] + m[(b, a)].conj());
            m[(a, b)] = avg;
            m[(b, a)] = avg.conj();
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    SymmetricEigen::new(rho.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v))
}

/// Options for [`evolve_lindblad`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    pub integrator: Integrator,
    /// Diagonalise ρ at each output time to record its smallest eigenvalue.
    pub check_positivity: bool,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions {
            integrator: Integrator::default(),
            check_positivity: true,
        }
    }
}

/// ρ(t) at each requested time. `basis` names the product state behind
/// every row of `h`, which fixes the dephasing pattern.
pub fn evolve_lindblad<B: Basis>(
    h: &SparseOp,
    basis: &B,
    rho0: &DensityMatrix,
    noise: &NoiseModel,
    times: &[f64],
    options: &LindbladOptions,
) -> Result<EvolutionResult<DensityMatrix>> {
    check_times(times)?;
    let l = Lindbladian::new(h, basis, noise)?;
    if rho0.nrows() != l.dim() || rho0.ncols() != l.dim() {
        return Err(Error::Validation(format!(
            "density matrix is {}x{}, operator dimension {}",
            rho0.nrows(),
            rho0.ncols(),
            l.dim()
        )));
    }
    evolve_with(&l, rho0, times, options)
}

pub fn evolve_with(
    l: &Lindbladian,
    rho0: &DensityMatrix,
    times: &[f64],
    options: &LindbladOptions,
) -> Result<EvolutionResult<DensityMatrix>> {
    let h_max = l.max_step(options.integrator);
    let mut rho = rho0.clone();
    let tr0 = rho0.trace().re;
    let mut now = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let mut traces = Vec::with_capacity(times.len());
    let mut min_eigs = Vec::new();
    for &t in times {
        let (mut next, mut drift) = l.advance(&rho, t - now, h_max, options.integrator);
        if drift > TRACE_REJECT {
            (next, drift) = l.advance(&rho, t - now, 0.5 * h_max, options.integrator);
            if drift > TRACE_REJECT {
                return Err(Error::Integration(format!(
                    "trace drift {drift:e} exceeds {TRACE_REJECT:e} after step halving"
                )));
            }
        }
        rho = next;
        now = t;
        traces.push(rho.trace().re);
        if options.check_positivity {
            min_eigs.push(min_eigenvalue(&rho));
        }
        states.push(rho.clone());
    }
    let drift = traces.iter().fold(0.0f64, |m, &t| m.max((t - tr0).abs()));
    let mut series = BTreeMap::from([
        ("trace".to_string(), traces),
        ("trace_drift".to_string(), vec![drift]),
    ]);
    if options.check_positivity {
        series.insert("min_eigenvalue".to_string(), min_eigs);
    }
    Ok(EvolutionResult {
        times: times.to_vec(),
        states,
        series,
    })
}

/// |ψ⟩⟨ψ|.
pub fn pure_density(psi: &crate::linalg::StateVector) -> DensityMatrix {
    psi * psi.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::unitary::evolve_unitary;
    use crate::model::{build_ising_hamiltonian, ChainGeometry, DriveParams, FullBasis, SectorBasis};
    use nalgebra::DVector;

    fn max_abs(m: &DensityMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    fn noise(gi: f64, gc: f64) -> NoiseModel {
        NoiseModel {
            gamma_ind: gi,
            gamma_col: gc,
            ..NoiseModel::none()
        }
    }

    #[test]
    fn closed_limit_matches_unitary() {
        let g = ChainGeometry::default_chain(4, 6.0).unwrap();
        let h = build_ising_hamiltonian(&g, &DriveParams::from_mhz(2.0, -4.0).unwrap()).unwrap();
        let mut psi = DVector::zeros(16);
        psi[0b0100] = C64::new(1.0, 0.0);
        let times = [0.1, 0.4, 1.0];
        let u = evolve_unitary(&h, &psi, &times).unwrap();
        let basis = FullBasis::new(4).unwrap();
        for integrator in [Integrator::default(), Integrator::rk4()] {
            let opts = LindbladOptions {
                integrator,
                check_positivity: false,
            };
            let r = evolve_lindblad(&h, &basis, &pure_density(&psi), &NoiseModel::none(), &times, &opts).unwrap();
            for (rho, s) in r.states.iter().zip(&u.states) {
                assert!(max_abs(&(rho - pure_density(s))) < 1e-8, "{integrator:?}");
            }
        }
    }

    #[test]
    fn two_site_pure_dephasing() {
        let gamma = 1.3;
        let basis = FullBasis::new(2).unwrap();
        let h = SparseOp::zeros(4);
        let mut psi = DVector::zeros(4);
        psi[0b01] = C64::new(0.6, 0.0);
        psi[0b10] = C64::new(0.8, 0.0);
        let times = [0.5, 1.0, 2.0];
        let r = evolve_lindblad(&h, &basis, &pure_density(&psi), &noise(gamma, 0.0), &times, &Default::default())
            .unwrap();
        for (t, rho) in times.iter().zip(&r.states) {
            let coh = rho[(0b01, 0b10)].re;
            assert!((coh - 0.48 * (-gamma * t / 2.0).exp()).abs() < 1e-12);
            assert!((rho[(0b01, 0b01)].re - 0.36).abs() < 1e-14);
        }
    }

    #[test]
    fn collective_dephasing_spares_equal_excitation_number() {
        let basis = SectorBasis::new(3, 1).unwrap();
        let h = SparseOp::zeros(3);
        let psi = DVector::from_element(3, C64::new(1.0 / 3f64.sqrt(), 0.0));
        let r = evolve_lindblad(&h, &basis, &pure_density(&psi), &noise(0.0, 5.0), &[3.0], &Default::default())
            .unwrap();
        assert!(max_abs(&(&r.states[0] - pure_density(&psi))) < 1e-14);
    }

    #[test]
    fn amplitude_damping_empties_the_excited_state() {
        let basis = FullBasis::new(1).unwrap();
        let mut n = NoiseModel::none();
        n.t1_rydberg = 2.0;
        n.amplitude_damping = true;
        let mut rho = DMatrix::zeros(2, 2);
        rho[(1, 1)] = C64::new(1.0, 0.0);
        let r = evolve_lindblad(&SparseOp::zeros(2), &basis, &rho, &n, &[1.0], &Default::default()).unwrap();
        assert!((r.states[0][(1, 1)].re - (-0.5f64).exp()).abs() < 1e-12);
        assert!((r.states[0].trace().re - 1.0).abs() < 1e-13);
    }
}
