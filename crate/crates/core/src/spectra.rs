//! Two-magnon spectra of an infinite uniform chain resolved by centre-of-mass
//! momentum K.
//!
//! A pair at sites i < j is written ψ_K(i, j) = e^{iKR} φ_K(r) with
//! R = (i + j)/2 and r = j − i ≥ 1. Hard-core exclusion makes r = 0
//! inaccessible, so the relative problem lives on r = 1..r_max.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::effective::coefficients::RESONANCE_TOLERANCE;
use crate::error::{Error, ResonanceKind, Result};
use crate::linalg::eigh;

/// Smallest relative-coordinate cutoff accepted.
pub const MIN_R_MAX: usize = 5;
pub const DEFAULT_R_MAX: usize = 80;
pub const DEFAULT_K_POINTS: usize = 64;
pub const DEFAULT_HOP_RANGE: usize = 3;
const CONTINUUM_SAMPLES: usize = 2048;
/// Relative energy shift under r_max → 2 r_max above which classification is refused.
pub const CUTOFF_SHIFT_TOLERANCE: f64 = 1e-3;
/// Minimum weight on r ≤ r_max/2 for a bound state.
pub const LOCALIZATION_THRESHOLD: f64 = 0.99;

/// Translation-invariant couplings of two magnons, all in rad/μs.
pub trait PairCouplings: Debug + Send + Sync {
    /// Free single-magnon hop J_d over distance d ≥ 1.
    fn exchange(&self, d: usize) -> f64;
    /// Hop of length `s` by one magnon whose partner sits `r_from` sites away
    /// before and `r_to` sites away after the hop.
    fn pair_hop(&self, s: usize, r_from: usize, r_to: usize) -> f64;
    /// Density interaction U_r at separation r ≥ 1.
    fn interaction(&self, r: usize) -> f64;
    /// Longest hop included.
    fn hop_range(&self) -> usize;
}

/// Infinite uniform chain dressed by a uniform drive.
#[derive(Debug, Clone)]
pub struct DressedChain {
    omega: f64,
    delta: f64,
    spacing: f64,
    c6: f64,
    hop_range: usize,
    lattice_half_width: usize,
}

impl DressedChain {
    /// Validates every perturbative denominator that can reach the
    /// resonance tolerance; beyond that range V_d ≪ |Δ|.
    pub fn new(omega: f64, delta: f64, spacing: f64, c6: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(c6 > 0.0) {
            return Err(Error::Domain(format!("spacing {spacing} and C6 {c6} must be positive")));
        }
        if delta == 0.0 || !delta.is_finite() {
            return Err(Error::resonance(ResonanceKind::Bare, "detuning is zero"));
        }
        let chain = DressedChain {
            omega,
            delta,
            spacing,
            c6,
            hop_range: DEFAULT_HOP_RANGE,
            lattice_half_width: 200,
        };
        let mut reach = 1;
        while chain.v(reach) > 1e-3 * delta.abs() {
            reach += 1;
        }
        let tol = RESONANCE_TOLERANCE * delta.abs();
        for a in 0..=reach {
            let va = chain.v(a);
            if a > 0 && (delta - va).abs() < tol {
                return Err(Error::resonance(
                    ResonanceKind::Facilitation,
                    format!("Δ = V at distance {a}"),
                ));
            }
            for b in 1..=reach {
                if (delta - va - chain.v(b)).abs() < tol {
                    return Err(Error::resonance(
                        ResonanceKind::AntiBlockade,
                        format!("Δ = V_{a} + V_{b}"),
                    ));
                }
            }
        }
        Ok(chain)
    }

    pub fn with_hop_range(mut self, d: usize) -> Self {
        self.hop_range = d.max(1);
        self
    }

    pub fn with_lattice_half_width(mut self, l: usize) -> Self {
        self.lattice_half_width = l;
        self
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// V at a separation of `d` sites (0 for d = 0).
    pub fn v(&self, d: usize) -> f64 {
        if d == 0 {
            0.0
        } else {
            self.c6 / (d as f64 * self.spacing).powi(6)
        }
    }

    fn j_raw(&self, v: f64) -> f64 {
        self.omega * self.omega * v / (4.0 * self.delta * (self.delta - v))
    }

    fn g_raw(&self, v_ij: f64, v_ik: f64) -> f64 {
        self.omega * self.omega * v_ij / (4.0 * (self.delta - v_ik) * (self.delta - v_ik - v_ij))
    }
}

impl PairCouplings for DressedChain {
    fn exchange(&self, d: usize) -> f64 {
        self.j_raw(self.v(d))
    }

    fn pair_hop(&self, s: usize, r_from: usize, r_to: usize) -> f64 {
        let vs = self.v(s);
        0.5 * (self.g_raw(vs, self.v(r_from)) + self.g_raw(vs, self.v(r_to)))
    }

    /// Bulk U_r: sites 0 and r with the lattice sum over l ∈ [−L, L + r].
    fn interaction(&self, r: usize) -> f64 {
        let l_max = self.lattice_half_width as i64;
        let r_i = r as i64;
        let mut s = 0.0;
        for l in -l_max..=(l_max + r_i) {
            if l == 0 || l == r_i {
                continue;
            }
            let (d0, dr) = (l.unsigned_abs() as usize, (l - r_i).unsigned_abs() as usize);
            let (v0, vr) = (self.v(d0), self.v(dr));
            s += (self.g_raw(v0, vr) - self.j_raw(v0)) + (self.g_raw(vr, v0) - self.j_raw(vr));
        }
        let v = self.v(r);
        v - 4.0 * self.j_raw(v) + 0.5 * s
    }

    fn hop_range(&self) -> usize {
        self.hop_range
    }
}

/// Non-interacting magnons with nearest-neighbour hopping J.
#[derive(Debug, Clone, Copy)]
pub struct FreeMagnons {
    pub j: f64,
}

impl PairCouplings for FreeMagnons {
    fn exchange(&self, d: usize) -> f64 {
        if d == 1 {
            self.j
        } else {
            0.0
        }
    }
    fn pair_hop(&self, s: usize, _: usize, _: usize) -> f64 {
        self.exchange(s)
    }
    fn interaction(&self, _: usize) -> f64 {
        0.0
    }
    fn hop_range(&self) -> usize {
        1
    }
}

fn relative_matrix(k: f64, model: &dyn PairCouplings, r_max: usize, u: &[f64]) -> DMatrix<f64> {
    let d_max = model.hop_range();
    DMatrix::from_fn(r_max, r_max, |a, b| {
        let (r, rp) = (a + 1, b + 1);
        let mut h = if r == rp { u[a] } else { 0.0 };
        let d = r.abs_diff(rp);
        if d > 0 && d <= d_max {
            h += 2.0 * (k * d as f64 / 2.0).cos() * model.pair_hop(d, r, rp);
        }
        let s = r + rp;
        if s <= d_max {
            h += 2.0 * (k * s as f64 / 2.0).cos() * model.pair_hop(s, r, rp);
        }
        h
    })
}

fn check_cutoff(r_max: usize) -> Result<()> {
    if r_max < MIN_R_MAX {
        return Err(Error::Cutoff(format!("r_max = {r_max} is below the minimum {MIN_R_MAX}")));
    }
    Ok(())
}

/// Relative-coordinate Hamiltonian H(K) on r = 1..r_max.
///
/// A hop of length d between relative distances r and r' carries the
/// centre-of-mass phase 2cos(Kd/2); hops that carry one magnon across the
/// other connect r and r' with d = r + r'.
pub fn relative_hamiltonian(k: f64, model: &dyn PairCouplings, r_max: usize) -> Result<DMatrix<f64>> {
    check_cutoff(r_max)?;
    let u: Vec<f64> = (1..=r_max).map(|r| model.interaction(r)).collect();
    Ok(relative_matrix(k, model, r_max, &u))
}

/// Lower and upper edge of the free two-magnon continuum at momentum K,
/// min/max over q of ε(K/2 + q) + ε(K/2 − q) with ε(k) = 2Σ_d J_d cos(kd).
pub fn continuum_edges(k: f64, model: &dyn PairCouplings) -> (f64, f64) {
    let js: Vec<f64> = (1..=model.hop_range()).map(|d| model.exchange(d)).collect();
    let eps = |p: f64| -> f64 {
        js.iter()
            .enumerate()
            .map(|(i, j)| 2.0 * j * (p * (i + 1) as f64).cos())
            .sum()
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for n in 0..=CONTINUUM_SAMPLES {
        let q = -PI + 2.0 * PI * n as f64 / CONTINUUM_SAMPLES as f64;
        let e = eps(k / 2.0 + q) + eps(k / 2.0 - q);
        lo = lo.min(e);
        hi = hi.max(e);
    }
    (lo, hi)
}

/// K_n = −π + 2π(n + 1)/n_k, n = 0..n_k, covering (−π, π].
pub fn k_grid(n_k: usize) -> Vec<f64> {
    (0..n_k)
        .map(|n| -PI + 2.0 * PI * (n + 1) as f64 / n_k as f64)
        .collect()
}

/// Eigenpairs of H(K) at one momentum.
#[derive(Debug, Clone, Serialize)]
pub struct MomentumSlice {
    pub k: f64,
    /// Ascending eigenvalues.
    pub energies: Vec<f64>,
    /// φ_K(r) per band (outer index band, inner r − 1), each normalised with
    /// its largest-magnitude component positive.
    pub wavefunctions: Vec<Vec<f64>>,
    pub continuum: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct TwoMagnonBands {
    pub r_max: usize,
    pub slices: Vec<MomentumSlice>,
    model: Arc<dyn PairCouplings>,
}

fn slice_at(k: f64, model: &dyn PairCouplings, r_max: usize, u: &[f64]) -> MomentumSlice {
    let e = eigh(relative_matrix(k, model, r_max, u));
    let wavefunctions = (0..r_max)
        .map(|b| {
            let col: DVector<f64> = e.vectors.column(b).into_owned();
            let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            col.iter().map(|x| x * sign).collect()
        })
        .collect();
    MomentumSlice {
        k,
        energies: e.values,
        wavefunctions,
        continuum: continuum_edges(k, model),
    }
}

/// Diagonalise H(K) on every momentum of `ks` (in parallel).
pub fn compute_bands(model: Arc<dyn PairCouplings>, ks: &[f64], r_max: usize) -> Result<TwoMagnonBands> {
    check_cutoff(r_max)?;
    let u: Vec<f64> = (1..=r_max).map(|r| model.interaction(r)).collect();
    let slices = ks
        .par_iter()
        .map(|&k| slice_at(k, model.as_ref(), r_max, &u))
        .collect();
    Ok(TwoMagnonBands { r_max, slices, model })
}

impl TwoMagnonBands {
    pub fn model(&self) -> &Arc<dyn PairCouplings> {
        &self.model
    }

    /// Same model and momenta with a different cutoff.
    pub fn recompute(&self, r_max: usize) -> Result<TwoMagnonBands> {
        let ks: Vec<f64> = self.slices.iter().map(|s| s.k).collect();
        compute_bands(self.model.clone(), &ks, r_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Tight,
    Loose,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundStateSummary {
    pub branch: Branch,
    pub k: f64,
    pub band: usize,
    pub energy: f64,
    /// ⟨r⟩ = Σ r|φ_K(r)|².
    pub bond_length: f64,
    /// Σ_{r≤2}|φ_K(r)|².
    pub localization: f64,
}

fn bound_in_slice(s: &MomentumSlice, r_max: usize) -> Vec<BoundStateSummary> {
    let (lo, hi) = s.continuum;
    let min_gap = (hi - lo) * (PI / r_max as f64).powi(2);
    let mut out = Vec::new();
    for (b, (&e, phi)) in s.energies.iter().zip(&s.wavefunctions).enumerate() {
        let gap = (lo - e).max(e - hi);
        let inner: f64 = phi[..r_max / 2].iter().map(|x| x * x).sum();
        if gap <= min_gap || inner <= LOCALIZATION_THRESHOLD {
            continue;
        }
        let p1 = phi[0] * phi[0];
        out.push(BoundStateSummary {
            branch: if p1 >= 0.5 { Branch::Tight } else { Branch::Loose },
            k: s.k,
            band: b,
            energy: e,
            bond_length: phi.iter().enumerate().map(|(r, x)| (r + 1) as f64 * x * x).sum(),
            localization: phi.iter().take(2).map(|x| x * x).sum(),
        });
    }
    out
}

/// Bound states: energy separated from the continuum by more than the
/// discretisation scale (hi − lo)(π/r_max)² and weight > 0.99 on r ≤ r_max/2.
///
/// Every candidate is recomputed with 2 r_max; a relative energy shift
/// above [`CUTOFF_SHIFT_TOLERANCE`] makes the result inconclusive.
pub fn classify_bound_states(bands: &TwoMagnonBands) -> Result<Vec<BoundStateSummary>> {
    let found: Vec<BoundStateSummary> = bands
        .slices
        .iter()
        .flat_map(|s| bound_in_slice(s, bands.r_max))
        .collect();
    if found.is_empty() {
        return Ok(found);
    }
    let wide = bands.recompute(2 * bands.r_max)?;
    for state in &found {
        let slice = wide
            .slices
            .iter()
            .find(|s| s.k == state.k)
            .expect("same momentum grid");
        let (lo, hi) = slice.continuum;
        let nearest = slice
            .energies
            .iter()
            .map(|e| (e - state.energy).abs())
            .fold(f64::INFINITY, f64::min);
        let scale = state.energy.abs().max(hi - lo);
        if nearest > CUTOFF_SHIFT_TOLERANCE * scale {
            return Err(Error::Inconclusive(format!(
                "bound state at K = {:.4} moved by {nearest:e} when r_max doubled to {}",
                state.k,
                2 * bands.r_max
            )));
        }
    }
    Ok(found)
}

/// How momenta are sampled when projecting a product state onto bound branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OverlapMethod {
    /// Uniform average over the momentum grid of the supplied bands.
    InfiniteChain,
    /// K_n = πn/(N+1), n = 1..N, for an open chain of N sites.
    StandingWave { chain_length: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchOverlap {
    pub tight: f64,
    pub loose: f64,
}

/// Weight of a pair product state at separation `r0` on each bound branch,
/// the momentum average of |φ_K(r0)|² over bound states.
pub fn initial_overlap(r0: usize, bands: &TwoMagnonBands, method: OverlapMethod) -> Result<BranchOverlap> {
    if r0 == 0 {
        return Err(Error::Validation("pair separation must be at least 1".into()));
    }
    let sampled;
    let bands = match method {
        OverlapMethod::InfiniteChain => bands,
        OverlapMethod::StandingWave { chain_length } => {
            if chain_length == 0 {
                return Err(Error::Validation("chain length must be positive".into()));
            }
            let ks: Vec<f64> = (1..=chain_length)
                .map(|n| PI * n as f64 / (chain_length + 1) as f64)
                .collect();
            sampled = compute_bands(bands.model.clone(), &ks, bands.r_max)?;
            &sampled
        }
    };
    let mut total = BranchOverlap { tight: 0.0, loose: 0.0 };
    if r0 > bands.r_max {
        return Ok(total);
    }
    for s in &bands.slices {
        for state in bound_in_slice(s, bands.r_max) {
            let w = s.wavefunctions[state.band][r0 - 1].powi(2);
            match state.branch {
                Branch::Tight => total.tight += w,
                Branch::Loose => total.loose += w,
            }
        }
    }
    let n = bands.slices.len() as f64;
    total.tight /= n;
    total.loose /= n;
    Ok(total)
}

/// Width max − min of one branch's energies over the momenta where it is bound.
pub fn branch_bandwidth(states: &[BoundStateSummary], branch: Branch) -> Option<f64> {
    let es: Vec<f64> = states.iter().filter(|s| s.branch == branch).map(|s| s.energy).collect();
    if es.is_empty() {
        return None;
    }
    let lo = es.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = es.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{mhz_to_angular, DEFAULT_C6_MHZ_UM6};
    use proptest::prelude::*;

    fn theory_chain() -> DressedChain {
        let a = (DEFAULT_C6_MHZ_UM6 / 24.0f64).powf(1.0 / 6.0);
        DressedChain::new(
            mhz_to_angular(1.0),
            mhz_to_angular(-3.0),
            a,
            mhz_to_angular(DEFAULT_C6_MHZ_UM6),
        )
        .unwrap()
    }

    #[test]
    fn cutoff_rejected() {
        let m = FreeMagnons { j: 1.0 };
        assert!(matches!(relative_hamiltonian(0.0, &m, 4), Err(Error::Cutoff(_))));
        assert!(relative_hamiltonian(0.0, &m, 5).is_ok());
    }

    #[test]
    fn free_magnons_have_no_bound_states() {
        let bands = compute_bands(Arc::new(FreeMagnons { j: 1.0 }), &k_grid(16), 40).unwrap();
        for s in &bands.slices {
            let (lo, hi) = s.continuum;
            assert!((lo + 4.0 * (s.k / 2.0).cos().abs()).abs() < 1e-6);
            assert!((hi - 4.0 * (s.k / 2.0).cos().abs()).abs() < 1e-6);
            for e in &s.energies {
                assert!(*e >= lo - 1e-9 && *e <= hi + 1e-9);
            }
        }
        assert!(classify_bound_states(&bands).unwrap().is_empty());
    }

    #[test]
    fn bulk_interaction_matches_finite_chain_centre() {
        use crate::effective::EffectiveCoefficients;
        use crate::model::{ChainGeometry, DriveParams};
        let m = theory_chain();
        let g = ChainGeometry::default_chain(41, m.spacing()).unwrap();
        let c = EffectiveCoefficients::new(&g, &DriveParams::from_mhz(1.0, -3.0).unwrap()).unwrap();
        for r in 1..=3 {
            let bulk = m.interaction(r);
            assert!((bulk - c.u(20, 20 + r)).abs() < 1e-9 * bulk.abs(), "r={r}");
        }
        assert!((m.pair_hop(1, 1, 2) - c.q(19, 20, 21)).abs() < 1e-12);
    }

    #[test]
    fn tight_branch_sits_near_u1() {
        let m = theory_chain();
        let bands = compute_bands(Arc::new(m.clone()), &k_grid(16), 60).unwrap();
        let states = classify_bound_states(&bands).unwrap();
        let u1 = m.interaction(1);
        let q = m.pair_hop(1, 1, 2).abs() + m.pair_hop(2, 1, 1).abs() + m.exchange(1).abs();
        for s in states.iter().filter(|s| s.branch == Branch::Tight) {
            assert!((s.energy - u1).abs() < 4.0 * q, "{} vs {u1}", s.energy);
        }
    }

    #[test]
    fn continuum_count_complements_bound_states() {
        let m: Arc<dyn PairCouplings> = Arc::new(theory_chain());
        let bands = compute_bands(m, &k_grid(8), 40).unwrap();
        for s in &bands.slices {
            let bound = bound_in_slice(s, 40).len();
            let (lo, hi) = s.continuum;
            let slack = 1e-9 * (hi - lo);
            let inside = s.energies.iter().filter(|&&e| e >= lo - slack && e <= hi + slack).count();
            assert_eq!(inside + bound, 40);
        }
    }

    #[test]
    fn far_apart_pair_has_no_overlap() {
        let bands = compute_bands(Arc::new(theory_chain()), &k_grid(16), 60).unwrap();
        let o = initial_overlap(59, &bands, OverlapMethod::InfiniteChain).unwrap();
        assert!(o.tight + o.loose < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn spectrum_even_in_momentum(k in 0.0f64..PI, a in 4.5f64..9.0) {
            let m = DressedChain::new(mhz_to_angular(2.0), mhz_to_angular(-3.0), a, mhz_to_angular(DEFAULT_C6_MHZ_UM6)).unwrap();
            let p = eigh(relative_hamiltonian(k, &m, 30).unwrap()).values;
            let q = eigh(relative_hamiltonian(-k, &m, 30).unwrap()).values;
            let scale = p.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            for (x, y) in p.iter().zip(&q) {
                prop_assert!((x - y).abs() < 1e-10 * scale);
            }
        }

        #[test]
        fn eigenvectors_normalised(k in -PI..PI) {
            let bands = compute_bands(Arc::new(theory_chain()), &[k], 30).unwrap();
            for phi in &bands.slices[0].wavefunctions {
                let n: f64 = phi.iter().map(|x| x * x).sum();
                prop_assert!((n - 1.0).abs() < 1e-10);
            }
        }
    }
}
