use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::mhz_to_angular;

/// Dephasing rates (rad/μs), Rydberg lifetime (μs) and thermal position spreads (μm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub gamma_ind: f64,
    pub gamma_col: f64,
    pub t1_rydberg: f64,
    pub sigma_radial: f64,
    pub sigma_axial: f64,
    /// Add σ⁻ decay at rate 1/t₁ to the master equation. Off by default: the
    /// lifetime then only enters the detection model.
    #[serde(default)]
    pub amplitude_damping: bool,
}

impl NoiseModel {
    /// Noise-free evolution and ideal positions.
    pub fn none() -> Self {
        NoiseModel {
            gamma_ind: 0.0,
            gamma_col: 0.0,
            t1_rydberg: f64::INFINITY,
            sigma_radial: 0.0,
            sigma_axial: 0.0,
            amplitude_damping: false,
        }
    }

    /// Measured imperfections: γ_ind = 2π×0.2 MHz, γ_col = 2π×0.4 MHz,
    /// t₁ = 43 μs, σ_r = 0.1 μm, σ_a = 0.3 μm.
    pub fn experimental() -> Self {
        NoiseModel {
            gamma_ind: mhz_to_angular(0.2),
            gamma_col: mhz_to_angular(0.4),
            t1_rydberg: 43.0,
            sigma_radial: 0.1,
            sigma_axial: 0.3,
            amplitude_damping: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x >= 0.0 && !x.is_nan();
        if !(ok(self.gamma_ind) && ok(self.gamma_col) && ok(self.sigma_radial) && ok(self.sigma_axial))
            || !(self.t1_rydberg > 0.0)
        {
            return Err(Error::Validation(format!("noise parameters must be non-negative: {self:?}")));
        }
        Ok(())
    }

    pub fn is_dissipative(&self) -> bool {
        self.gamma_ind > 0.0 || self.gamma_col > 0.0 || (self.amplitude_damping && self.t1_rydberg.is_finite())
    }

    pub fn has_disorder(&self) -> bool {
        self.sigma_radial > 0.0 || self.sigma_axial > 0.0
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::none()
    }
}
