use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::mhz_to_angular;

/// Global Rabi frequency and detuning plus per-site addressing shifts, all in rad/μs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega: f64,
    pub delta: f64,
    /// Per-site detuning offsets Δ_A; empty means zero everywhere.
    #[serde(default)]
    pub addressing: Vec<f64>,
}

impl DriveParams {
    pub fn new(omega: f64, delta: f64) -> Result<Self> {
        if !(omega >= 0.0) || !omega.is_finite() || !delta.is_finite() {
            return Err(Error::Validation(format!(
                "drive needs omega >= 0 and finite detuning (omega={omega}, delta={delta})"
            )));
        }
        Ok(DriveParams {
            omega,
            delta,
            addressing: Vec::new(),
        })
    }

    /// Build from values quoted as f/2π in MHz.
    pub fn from_mhz(omega_mhz: f64, delta_mhz: f64) -> Result<Self> {
        Self::new(mhz_to_angular(omega_mhz), mhz_to_angular(delta_mhz))
    }

    pub fn with_addressing(mut self, addressing: Vec<f64>) -> Self {
        self.addressing = addressing;
        self
    }

    pub fn addressing_at(&self, site: usize) -> f64 {
        self.addressing.get(site).copied().unwrap_or(0.0)
    }

    /// Effective detuning Δ + Δ_A,i seen by one site.
    pub fn site_detuning(&self, site: usize) -> f64 {
        self.delta + self.addressing_at(site)
    }

    pub fn has_addressing(&self) -> bool {
        self.addressing.iter().any(|&a| a != 0.0)
    }

    pub(crate) fn check_sites(&self, n_sites: usize) -> Result<()> {
        if self.addressing.len() > n_sites {
            return Err(Error::Validation(format!(
                "{} addressing offsets for {} sites",
                self.addressing.len(),
                n_sites
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_rabi_rejected() {
        assert!(DriveParams::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn per_site_detuning() {
        let d = DriveParams::new(1.0, 2.0).unwrap().with_addressing(vec![0.0, -5.0]);
        assert_eq!(d.site_detuning(0), 2.0);
        assert_eq!(d.site_detuning(1), -3.0);
        assert_eq!(d.site_detuning(7), 2.0);
    }
}
