//! Haken–Reineker–Strobl single-excitation transport: coherent nearest-neighbour
//! hopping J on an open chain, with every coherence ρ_mn (m ≠ n) decaying at γ.

use nalgebra::DMatrix;

use super::lindblad::{evolve_with, Integrator, LindbladOptions, Lindbladian};
use super::unitary::check_times;
use crate::error::{Error, Result};
use crate::linalg::{SparseOp, C64};

/// ⟨x²⟩(t) measured from `origin`, starting with the excitation on `origin`.
pub fn hrs_msd_from(n_sites: usize, origin: usize, j_hop: f64, gamma: f64, times: &[f64]) -> Result<Vec<f64>> {
    if n_sites == 0 || origin >= n_sites {
        return Err(Error::Validation(format!("origin {origin} outside a {n_sites}-site chain")));
    }
    if !(gamma >= 0.0) || !j_hop.is_finite() {
        return Err(Error::Validation(format!("invalid HRS parameters J={j_hop}, gamma={gamma}")));
    }
    check_times(times)?;
    let t = (0..n_sites.saturating_sub(1))
        .flat_map(|i| [(i, i + 1, j_hop), (i + 1, i, j_hop)])
        .collect();
    let h = SparseOp::from_triplets(n_sites, t);
    let g = DMatrix::from_fn(n_sites, n_sites, |a, b| if a == b { 0.0 } else { gamma });
    let l = Lindbladian::from_dephasing(&h, g)?;
    let mut rho0 = DMatrix::zeros(n_sites, n_sites);
    rho0[(origin, origin)] = C64::new(1.0, 0.0);
    let opts = LindbladOptions {
        integrator: Integrator::default(),
        check_positivity: false,
    };
    let r = evolve_with(&l, &rho0, times, &opts)?;
    Ok(r.states
        .iter()
        .map(|rho| {
            (0..n_sites)
                .map(|i| (i as f64 - origin as f64).powi(2) * rho[(i, i)].re)
                .sum()
        })
        .collect())
}

/// ⟨x²⟩(t) with the excitation starting at the chain centre.
pub fn hrs_msd(n_sites: usize, j_hop: f64, gamma: f64, times: &[f64]) -> Result<Vec<f64>> {
    hrs_msd_from(n_sites, n_sites.saturating_sub(1) / 2, j_hop, gamma, times)
}

/// Infinite-chain closed form (4J²/γ²)(γt − 1 + e^{−γt}); 2J²t² at γ = 0.
pub fn hrs_msd_infinite(j_hop: f64, gamma: f64, t: f64) -> f64 {
    let x = gamma * t;
    if x < 1e-4 {
        // series of x − 1 + e^{−x} avoids cancellation
        2.0 * j_hop * j_hop * t * t * (1.0 - x / 3.0 + x * x / 12.0)
    } else {
        4.0 * j_hop * j_hop / (gamma * gamma) * (x - 1.0 + (-x).exp())
    }
}

/// Local exponent d ln⟨x²⟩ / d ln t from a symmetric log-spaced difference.
pub fn local_exponent(f: impl Fn(f64) -> Result<f64>, t: f64, rel: f64) -> Result<f64> {
    let (a, b) = (t * (1.0 - rel), t * (1.0 + rel));
    Ok((f(b)?.ln() - f(a)?.ln()) / ((1.0 + rel).ln() - (1.0 - rel).ln()))
}
