use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{eigh, require_hermitian, SparseOp, StateVector, C64};

/// Operators up to this dimension are propagated by full diagonalisation.
pub const DENSE_EIGEN_MAX_DIM: usize = 1024;
const KRYLOV_DIM: usize = 30;
/// Accepted Lanczos error estimate per step.
const KRYLOV_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EvolutionResult<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    /// Named diagnostics or observables, one value per time.
    pub series: BTreeMap<String, Vec<f64>>,
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("times must be finite, non-negative and non-decreasing".into()));
    }
    Ok(())
}

/// |ψ(t)⟩ = exp(−iHt)|ψ₀⟩ at each requested time.
pub fn evolve_unitary(h: &SparseOp, psi0: &StateVector, times: &[f64]) -> Result<EvolutionResult<StateVector>> {
    require_hermitian(h)?;
    check_times(times)?;
    if psi0.len() != h.dim() {
        return Err(Error::Validation(format!(
            "state length {} does not match operator dimension {}",
            psi0.len(),
            h.dim()
        )));
    }
    let states = if h.dim() <= DENSE_EIGEN_MAX_DIM {
        let prop = EigenPropagator::new(h);
        times.iter().map(|&t| prop.apply(psi0, t)).collect()
    } else {
        let mut out = Vec::with_capacity(times.len());
        let mut psi = psi0.clone();
        let mut now = 0.0;
        for &t in times {
            psi = krylov_evolve(h, &psi, t - now)?;
            now = t;
            out.push(psi.clone());
        }
        out
    };
    let norms = states.iter().map(|s: &StateVector| s.norm()).collect();
    Ok(EvolutionResult {
        times: times.to_vec(),
        states,
        series: BTreeMap::from([("norm".to_string(), norms)]),
    })
}

/// exp(−iHt) through the eigendecomposition of a real symmetric H.
#[derive(Debug, Clone)]
pub struct EigenPropagator {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl EigenPropagator {
    pub fn new(h: &SparseOp) -> Self {
        let e = eigh(h.to_dense());
        EigenPropagator {
            values: e.values,
            vectors: e.vectors,
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.values
    }

    pub fn apply(&self, psi: &StateVector, t: f64) -> StateVector {
        let v = &self.vectors;
        let n = v.nrows();
        let mut coeff = DVector::<C64>::zeros(n);
        for k in 0..n {
            let mut c = C64::new(0.0, 0.0);
            for i in 0..n {
                c += psi[i] * v[(i, k)];
            }
            coeff[k] = c * C64::from_polar(1.0, -self.values[k] * t);
        }
        let mut out = DVector::<C64>::zeros(n);
        for k in 0..n {
            let c = coeff[k];
            for i in 0..n {
                out[i] += c * v[(i, k)];
            }
        }
        out
    }
}

/// One Lanczos step exp(−iH dt)ψ and its a-posteriori error estimate.
pub fn lanczos_step(h: &SparseOp, psi: &StateVector, dt: f64, m_max: usize) -> (StateVector, f64) {
    let n = psi.len();
    let beta0 = psi.norm();
    if beta0 == 0.0 || dt == 0.0 {
        return (psi.clone(), 0.0);
    }
    let m_max = m_max.min(n).max(1);
    let mut basis: Vec<StateVector> = vec![psi / C64::new(beta0, 0.0)];
    let mut alpha = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);
    let scale = h.spectral_bound().max(f64::MIN_POSITIVE);
    let mut breakdown = false;
    for j in 0..m_max {
        let mut w = h.mul_vec(&basis[j]);
        let a = basis[j].dotc(&w).re;
        alpha.push(a);
        w -= &basis[j] * C64::new(a, 0.0);
        if j > 0 {
            w -= &basis[j - 1] * C64::new(beta[j - 1], 0.0);
        }
        for v in &basis {
            let c = v.dotc(&w);
            w -= v * c;
        }
        let b = w.norm();
        beta.push(b);
        if b < 1e-13 * scale {
            breakdown = true;
            break;
        }
        if j + 1 < m_max {
            basis.push(w / C64::new(b, 0.0));
        }
    }
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let e = eigh(t);
    let mut small = DVector::<C64>::zeros(m);
    for k in 0..m {
        let w = C64::from_polar(e.vectors[(0, k)], -e.values[k] * dt);
        for r in 0..m {
            small[r] += w * e.vectors[(r, k)];
        }
    }
    let err = if breakdown { 0.0 } else { beta0 * beta[m - 1] * small[m - 1].norm() };
    let mut out = DVector::<C64>::zeros(n);
    for (k, v) in basis.iter().take(m).enumerate() {
        out += v * (small[k] * beta0);
    }
    (out, err)
}

/// exp(−iHt)ψ by adaptive Lanczos stepping.
pub fn krylov_evolve(h: &SparseOp, psi: &StateVector, t: f64) -> Result<StateVector> {
    let mut psi = psi.clone();
    let mut remaining = t;
    let mut dt = t;
    let mut halvings = 0;
    while remaining > 0.0 {
        dt = dt.min(remaining);
        let (next, err) = lanczos_step(h, &psi, dt, KRYLOV_DIM);
        if err > KRYLOV_TOL {
            dt *= 0.5;
            halvings += 1;
            if halvings > 200 {
                return Err(Error::Integration("Lanczos step size underflow".into()));
            }
            continue;
        }
        psi = next;
        remaining -= dt;
        dt *= 2.0;
    }
    Ok(psi)
}
