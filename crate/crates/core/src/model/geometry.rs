use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{mhz_to_angular, DEFAULT_C6_MHZ_UM6};

/// Van der Waals interaction C₆/r⁶.
pub fn vdw_interaction(r: f64, c6: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(format!("interatomic distance must be > 0, got {r}")));
    }
    Ok(c6 / r.powi(6))
}

/// Atom positions in μm plus the C₆ coefficient (rad/μs · μm⁶).
///
/// Ideal chains lie along x. The tweezer optical axis is z, so axial
/// positional noise acts on z and radial noise on x and y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainGeometry {
    positions: Vec<[f64; 3]>,
    c6: f64,
}

impl ChainGeometry {
    pub fn new(positions: Vec<[f64; 3]>, c6: f64) -> Result<Self> {
        if !(c6 > 0.0) || !c6.is_finite() {
            return Err(Error::Validation(format!("C6 must be positive and finite, got {c6}")));
        }
        if positions.is_empty() {
            return Err(Error::Validation("geometry has no atoms".into()));
        }
        let geom = ChainGeometry { positions, c6 };
        for i in 0..geom.len() {
            for j in (i + 1)..geom.len() {
                let d = geom.distance(i, j);
                if !(d > 0.0) {
                    return Err(Error::Validation(format!(
                        "atoms {i} and {j} coincide (distance {d})"
                    )));
                }
            }
        }
        Ok(geom)
    }

    /// `n` atoms along x with the given spacing in μm.
    pub fn uniform_chain(n: usize, spacing: f64, c6: f64) -> Result<Self> {
        let positions = (0..n).map(|i| [i as f64 * spacing, 0.0, 0.0]).collect();
        Self::new(positions, c6)
    }

    /// Uniform chain with the default |71S⟩ coefficient.
    pub fn default_chain(n: usize, spacing: f64) -> Result<Self> {
        Self::uniform_chain(n, spacing, mhz_to_angular(DEFAULT_C6_MHZ_UM6))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn c6(&self) -> f64 {
        self.c6
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    pub fn interaction(&self, i: usize, j: usize) -> f64 {
        self.c6 / self.distance(i, j).powi(6)
    }

    pub fn interaction_matrix(&self) -> InteractionMatrix {
        let n = self.len();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { self.interaction(i, j) });
        InteractionMatrix(m)
    }

    /// Spacing if the atoms form an ideal equally spaced straight chain.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let a = self.distance(0, 1);
        let x0 = self.positions[0];
        let dir = [
            (self.positions[1][0] - x0[0]) / a,
            (self.positions[1][1] - x0[1]) / a,
            (self.positions[1][2] - x0[2]) / a,
        ];
        let tol = 1e-9 * a;
        for (k, p) in self.positions.iter().enumerate() {
            for ax in 0..3 {
                if (p[ax] - (x0[ax] + dir[ax] * a * k as f64)).abs() > tol {
                    return None;
                }
            }
        }
        Some(a)
    }

    /// Copy with every atom displaced by `offsets` (μm).
    pub fn displaced(&self, offsets: &[[f64; 3]]) -> Result<Self> {
        assert_eq!(offsets.len(), self.len());
        let positions = self
            .positions
            .iter()
            .zip(offsets)
            .map(|(p, d)| [p[0] + d[0], p[1] + d[1], p[2] + d[2]])
            .collect();
        Self::new(positions, self.c6)
    }
}

/// Symmetric matrix of pair interactions V_ij (zero diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix(pub DMatrix<f64>);

impl InteractionMatrix {
    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Keep only pairs with |i − j| ≤ `range` (chain index distance).
    pub fn truncated(&self, range: usize) -> Self {
        let n = self.len();
        InteractionMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) <= range {
                self.0[(i, j)]
            } else {
                0.0
            }
        }))
    }
}
