use nalgebra::{DMatrix, DVector};

use crate::error::{Error, ResonanceKind, Result};
use crate::model::{ChainGeometry, DriveParams, InteractionMatrix};

/// A perturbative denominator smaller than this fraction of |Δ| is treated as a resonance.
pub const RESONANCE_TOLERANCE: f64 = 1e-6;

fn check_detuning(delta: f64) -> Result<()> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::resonance(
            ResonanceKind::Bare,
            format!("detuning {delta} leaves the drive resonant"),
        ));
    }
    Ok(())
}

fn check_denominator(den: f64, delta: f64, kind: ResonanceKind, what: &str) -> Result<()> {
    if den.abs() < RESONANCE_TOLERANCE * delta.abs() {
        return Err(Error::resonance(
            kind,
            format!("{what} = {den:e} with detuning {delta:e}"),
        ));
    }
    Ok(())
}

/// Light shift δ = Ω²/4Δ.
pub fn coeff_delta(omega: f64, delta: f64) -> Result<f64> {
    check_detuning(delta)?;
    Ok(omega * omega / (4.0 * delta))
}

/// Dressed exchange J = Ω²V/[4Δ(Δ−V)].
pub fn coeff_j(omega: f64, delta: f64, v_ij: f64) -> Result<f64> {
    check_detuning(delta)?;
    check_denominator(delta - v_ij, delta, ResonanceKind::Facilitation, "Δ − V_ij")?;
    if v_ij == 0.0 {
        return Ok(0.0);
    }
    Ok(omega * omega * v_ij / (4.0 * delta * (delta - v_ij)))
}

/// Density-assisted exchange G_ijk = Ω²V_ij/[4(Δ−V_ik)(Δ−V_ik−V_ij)] for a hop
/// across the pair (i, j) while site k is excited.
pub fn coeff_g(omega: f64, delta: f64, v_ij: f64, v_ik: f64) -> Result<f64> {
    check_detuning(delta)?;
    let (first, second) = if v_ik == 0.0 {
        (ResonanceKind::Bare, ResonanceKind::Facilitation)
    } else {
        (ResonanceKind::AntiBlockade, ResonanceKind::AntiBlockade)
    };
    check_denominator(delta - v_ik, delta, first, "Δ − V_ik")?;
    check_denominator(delta - v_ik - v_ij, delta, second, "Δ − V_ik − V_ij")?;
    if v_ij == 0.0 {
        return Ok(0.0);
    }
    Ok(omega * omega * v_ij / (4.0 * (delta - v_ik) * (delta - v_ik - v_ij)))
}

/// Second-order coefficient tables for one geometry and a uniform drive.
///
/// Indices follow the chain; `g(i, j, k)` and `q(i, j, k)` are zero unless
/// i, j, k are pairwise distinct.
#[derive(Debug, Clone)]
pub struct EffectiveCoefficients {
    n: usize,
    omega: f64,
    delta: f64,
    delta_ls: f64,
    v: DMatrix<f64>,
    j: DMatrix<f64>,
    g: Vec<f64>,
    u: DMatrix<f64>,
    mu: DVector<f64>,
}

impl EffectiveCoefficients {
    /// Requires a drive without addressing shifts.
    pub fn new(geom: &ChainGeometry, drive: &DriveParams) -> Result<Self> {
        Self::from_interactions(&geom.interaction_matrix(), drive)
    }

    pub fn from_interactions(v: &InteractionMatrix, drive: &DriveParams) -> Result<Self> {
        if drive.has_addressing() {
            return Err(Error::Validation(
                "effective coefficients need a uniform detuning; addressing shifts are set".into(),
            ));
        }
        let (omega, delta) = (drive.omega, drive.delta);
        let n = v.len();
        let delta_ls = coeff_delta(omega, delta)?;
        let mut j = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in (a + 1)..n {
                let x = coeff_j(omega, delta, v.get(a, b))?;
                j[(a, b)] = x;
                j[(b, a)] = x;
            }
        }
        let mut g = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        g[(a * n + b) * n + c] = coeff_g(omega, delta, v.get(a, b), v.get(a, c))?;
                    }
                }
            }
        }
        let mut coeffs = EffectiveCoefficients {
            n,
            omega,
            delta,
            delta_ls,
            v: v.0.clone(),
            j,
            g,
            u: DMatrix::zeros(n, n),
            mu: DVector::zeros(n),
        };
        for a in 0..n {
            coeffs.mu[a] = -delta + 2.0 * delta_ls + coeffs.j.row(a).sum();
            for b in 0..n {
                if a != b {
                    coeffs.u[(a, b)] = coeffs.compute_u(a, b);
                }
            }
        }
        Ok(coeffs)
    }

    fn compute_u(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for l in 0..self.n {
            if l != i && l != j {
                s += (self.g(l, i, j) - self.j(l, i)) + (self.g(l, j, i) - self.j(l, j));
            }
        }
        self.u_two_body(i, j) + 0.5 * s
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn detuning(&self) -> f64 {
        self.delta
    }

    /// δ = Ω²/4Δ.
    pub fn delta_ls(&self) -> f64 {
        self.delta_ls
    }

    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.v[(i, j)]
    }

    pub fn j(&self, i: usize, j: usize) -> f64 {
        self.j[(i, j)]
    }

    pub fn j_matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn g(&self, i: usize, j: usize, k: usize) -> f64 {
        self.g[(i * self.n + j) * self.n + k]
    }

    /// Q_ijk = (G_ijk + G_jik)/2: amplitude for a magnon hopping i ↔ j with k excited.
    pub fn q(&self, i: usize, j: usize, k: usize) -> f64 {
        0.5 * (self.g(i, j, k) + self.g(j, i, k))
    }

    /// Magnon-magnon density interaction including the symmetrised sum over
    /// every other site l of the chain:
    /// V_ij − 4J_ij + ½Σ_l[(G_lij − J_li) + (G_lji − J_lj)].
    pub fn u(&self, i: usize, j: usize) -> f64 {
        self.u[(i, j)]
    }

    /// The two-body part V_ij − 4J_ij of the density interaction.
    pub fn u_two_body(&self, i: usize, j: usize) -> f64 {
        self.v[(i, j)] - 4.0 * self.j[(i, j)]
    }

    pub fn u_matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Single-magnon on-site potential μ_i = −Δ + 2δ + Σ_{j≠i} J_ij.
    pub fn mu(&self, i: usize) -> f64 {
        self.mu[i]
    }

    pub fn mu_vector(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn mean_mu(&self) -> f64 {
        self.mu.mean()
    }
}

/// Characteristic length r_c = (C₆/|Δ|)^{1/6} in μm.
pub fn dressing_radius(delta: f64, c6: f64) -> Result<f64> {
    check_detuning(delta)?;
    Ok((c6 / delta.abs()).powf(1.0 / 6.0))
}

/// Dressed pair exchange as a function of distance,
/// J(r) = δ/[sgn(Δ)(r/r_c)⁶ − 1].
///
/// For Δ < 0 this is the soft-core curve |δ|/[(r/r_c)⁶ + 1]; for Δ > 0 it
/// diverges at r = r_c. Identical to [`coeff_j`] at V = C₆/r⁶.
pub fn dressing_potential(r: f64, omega: f64, delta: f64, c6: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(format!("distance must be > 0, got {r}")));
    }
    let rc = dressing_radius(delta, c6)?;
    // (r/r_c)⁶ = r⁶|Δ|/C₆, evaluated without the sixth root
    let x6 = delta.signum() * r.powi(6) * delta.abs() / c6;
    let den = x6 - 1.0;
    if den.abs() < RESONANCE_TOLERANCE {
        return Err(Error::resonance(
            ResonanceKind::Facilitation,
            format!("r = {r} μm sits on the divergence r_c = {rc} μm"),
        ));
    }
    Ok(coeff_delta(omega, delta)? / den)
}
