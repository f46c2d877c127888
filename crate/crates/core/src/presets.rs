//! Named experiment configurations matching the measured parameter sets.

use crate::dynamics::{ExperimentSpec, Integrator, NoiseModel, RampSegment, Schedule};
use crate::error::{Error, Result};
use crate::measurement::DetectionModel;
use crate::model::{ChainGeometry, DriveParams};
use crate::units::mhz_to_angular;

pub const PRESET_NAMES: [&str; 7] = [
    "two-atom-exchange",
    "quantum-walk",
    "tight-pair-transport",
    "tight-pair-frozen",
    "loose-pair-transport",
    "loose-pair-free",
    "bound-state-theory",
];

/// Nearest-neighbour spacing giving V₁/Δ = −8 at Δ/2π = −3 MHz.
pub fn bound_state_theory_spacing() -> f64 {
    (crate::units::DEFAULT_C6_MHZ_UM6 / 24.0).powf(1.0 / 6.0)
}

/// Raw table values, frequencies as f/2π in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRow {
    pub n_sites: usize,
    pub spacing: f64,
    pub omega_mhz: f64,
    pub delta_mhz: f64,
    /// 0-based initially excited sites.
    pub excited: Vec<usize>,
    /// Addressing offsets of the excited sites during preparation.
    pub addressing_mhz: Vec<f64>,
    pub delta_initial_mhz: f64,
    pub delta_final_mhz: f64,
    pub t_max: f64,
    pub dt: f64,
}

pub fn preset_row(name: &str) -> Result<PresetRow> {
    let row = |n, a, om, de, exc: &[usize], da: &[f64], di, df, t_max, dt| PresetRow {
        n_sites: n,
        spacing: a,
        omega_mhz: om,
        delta_mhz: de,
        excited: exc.to_vec(),
        addressing_mhz: da.to_vec(),
        delta_initial_mhz: di,
        delta_final_mhz: df,
        t_max,
        dt,
    };
    Ok(match name {
        "two-atom-exchange" => row(2, 4.95, 1.52, 5.0, &[1], &[], 5.0, 5.0, 8.0, 0.02),
        "quantum-walk" => row(7, 4.95, 2.54, -5.0, &[3], &[-15.8], 5.0, 30.0, 2.0, 0.05),
        "tight-pair-transport" => row(6, 7.0, 2.54, 12.0, &[2, 3], &[-20.3, -18.6], 10.0, 35.0, 4.0, 0.1),
        "tight-pair-frozen" => row(6, 7.0, 2.54, -3.3, &[2, 3], &[-20.3, -18.6], 10.0, 35.0, 4.0, 0.1),
        "loose-pair-transport" => row(7, 4.95, 2.06, -3.0, &[2, 4], &[-7.4, -5.4], 3.0, 15.0, 3.0, 0.1),
        "loose-pair-free" => row(7, 8.5, 2.06, -3.0, &[2, 4], &[-7.4, -5.4], 3.0, 15.0, 3.0, 0.1),
        "bound-state-theory" => row(9, bound_state_theory_spacing(), 1.0, -3.0, &[3, 4], &[], -3.0, -3.0, 20.0, 0.5),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

impl PresetRow {
    /// The three-stage adiabatic preparation: ramp Ω on at Δ_i, sweep Δ_i → Δ_f,
    /// ramp Ω off, with the excited sites addressed throughout.
    pub fn preparation(&self) -> Option<Schedule> {
        if self.addressing_mhz.is_empty() {
            return None;
        }
        let om = mhz_to_angular(self.omega_mhz);
        let (di, df) = (mhz_to_angular(self.delta_initial_mhz), mhz_to_angular(self.delta_final_mhz));
        let mut addressing = vec![0.0; self.n_sites];
        for (s, a) in self.excited.iter().zip(&self.addressing_mhz) {
            addressing[*s] = mhz_to_angular(*a);
        }
        let seg = |duration, omega_start, omega_end, delta_start, delta_end| RampSegment {
            duration,
            omega_start,
            omega_end,
            delta_start,
            delta_end,
        };
        Some(Schedule {
            segments: vec![seg(0.1, 0.0, om, di, di), seg(0.8, om, om, di, df), seg(0.1, om, 0.0, df, df)],
            addressing,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt).round() as usize;
        (0..=n).map(|k| k as f64 * self.dt).collect()
    }
}

/// Noise-free experiment for a named preset; callers layer noise on top.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let row = preset_row(name)?;
    let geometry = ChainGeometry::default_chain(row.n_sites, row.spacing)?;
    Ok(ExperimentSpec {
        name: Some(name.to_string()),
        geometry,
        drive: DriveParams::from_mhz(row.omega_mhz, row.delta_mhz)?,
        excited_sites: row.excited.clone(),
        preparation: None,
        times: row.times(),
        noise: NoiseModel::none(),
        detection: DetectionModel::perfect(),
        max_excitations: None,
        init_error: 0.0,
        integrator: Integrator::default(),
    })
}

/// Preset with the measured noise, disorder and default detection.
pub fn noisy_preset(name: &str) -> Result<ExperimentSpec> {
    let mut spec = preset(name)?;
    spec.noise = NoiseModel::experimental();
    spec.detection = DetectionModel::experimental();
    Ok(spec)
}
