use serde::Serialize;

use crate::effective::coefficients::EffectiveCoefficients;
use crate::error::{Error, Result};
use crate::model::{ChainGeometry, DriveParams};

/// Nearest- and next-nearest-neighbour anisotropies at the chain centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnisotropyReport {
    /// Centre site i (0-based) at which the ratios are taken.
    pub centre: usize,
    /// ξ₁ = U_{i,i+1}/Q_{i−1,i,i+1} with the full lattice sum in U.
    pub xi1: f64,
    /// ξ₂ = U_{i,i+2}/Q_{i−1,i,i+2} with the full lattice sum in U.
    pub xi2: f64,
    /// ξ₁ using only V − 4J for U.
    pub xi1_two_body: f64,
    /// ξ₂ using only V − 4J for U.
    pub xi2_two_body: f64,
    /// Tight-pair hop Q_{i,i+2,i+1}.
    pub q_nnn: f64,
    /// Nearest-neighbour exchange J_{i,i+1}.
    pub j_nn: f64,
}

pub fn anisotropies(geom: &ChainGeometry, drive: &DriveParams) -> Result<AnisotropyReport> {
    let n = geom.len();
    if n < 5 {
        return Err(Error::Validation(format!("anisotropies need at least 5 sites, got {n}")));
    }
    if geom.uniform_spacing().is_none() {
        return Err(Error::Validation("anisotropies are defined for uniform straight chains".into()));
    }
    let c = EffectiveCoefficients::new(geom, drive)?;
    anisotropies_from(&c)
}

/// Ratios from precomputed coefficients of a uniform chain.
pub fn anisotropies_from(c: &EffectiveCoefficients) -> Result<AnisotropyReport> {
    let n = c.len();
    if n < 5 {
        return Err(Error::Validation(format!("anisotropies need at least 5 sites, got {n}")));
    }
    let i = (n - 1) / 2;
    let q1 = c.q(i - 1, i, i + 1);
    let q2 = c.q(i - 1, i, i + 2);
    Ok(AnisotropyReport {
        centre: i,
        xi1: c.u(i, i + 1) / q1,
        xi2: c.u(i, i + 2) / q2,
        xi1_two_body: c.u_two_body(i, i + 1) / q1,
        xi2_two_body: c.u_two_body(i, i + 2) / q2,
        q_nnn: c.q(i, i + 2, i + 1),
        j_nn: c.j(i, i + 1),
    })
}
