use serde::{Deserialize, Serialize};

use super::unitary::lanczos_step;
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::model::{Basis, ChainGeometry, IsingTerms};

/// Default midpoint step for time-dependent drives (μs).
pub const DEFAULT_SCHEDULE_STEP: f64 = 0.002;

/// Linear ramp of (Ω, Δ) over `duration` μs, rad/μs throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSegment {
    pub duration: f64,
    pub omega_start: f64,
    pub omega_end: f64,
    pub delta_start: f64,
    pub delta_end: f64,
}

impl RampSegment {
    fn at(&self, s: f64) -> (f64, f64) {
        let f = if self.duration > 0.0 { s / self.duration } else { 1.0 };
        (
            self.omega_start + f * (self.omega_end - self.omega_start),
            self.delta_start + f * (self.delta_end - self.delta_start),
        )
    }
}

/// Piecewise-linear drive with fixed per-site addressing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub segments: Vec<RampSegment>,
    #[serde(default)]
    pub addressing: Vec<f64>,
}

impl Schedule {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// (Ω, Δ) at time t; holds the last value past the end.
    pub fn drive_at(&self, t: f64) -> (f64, f64) {
        let mut start = 0.0;
        for seg in &self.segments {
            if t <= start + seg.duration {
                return seg.at(t - start);
            }
            start += seg.duration;
        }
        self.segments.last().map(|s| s.at(s.duration)).unwrap_or((0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.segments {
            let vals = [s.duration, s.omega_start, s.omega_end, s.delta_start, s.delta_end];
            if vals.iter().any(|v| !v.is_finite()) || s.duration < 0.0 || s.omega_start < 0.0 || s.omega_end < 0.0 {
                return Err(Error::Validation(format!("invalid ramp segment {s:?}")));
            }
        }
        Ok(())
    }
}

/// Propagate through the schedule with exponential-midpoint steps of at most `dt`.
pub fn evolve_schedule<B: Basis>(
    geom: &ChainGeometry,
    schedule: &Schedule,
    basis: &B,
    psi0: &StateVector,
    dt: f64,
) -> Result<StateVector> {
    schedule.validate()?;
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("schedule step must be positive, got {dt}")));
    }
    let terms = IsingTerms::new(geom, &schedule.addressing, basis)?;
    let mut psi = psi0.clone();
    for seg in &schedule.segments {
        let steps = (seg.duration / dt).ceil().max(1.0) as usize;
        let h = seg.duration / steps as f64;
        for k in 0..steps {
            let (omega, delta) = seg.at((k as f64 + 0.5) * h);
            let op = terms.assemble(omega, delta);
            let mut t = h;
            let mut done = 0.0;
            while done < h {
                t = t.min(h - done);
                let (next, err) = lanczos_step(&op, &psi, t, 30);
                if err > 1e-12 && t > 1e-9 * h {
                    t *= 0.5;
                    continue;
                }
                psi = next;
                done += t;
            }
        }
    }
    Ok(psi)
}
