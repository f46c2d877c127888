use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::disorder::disorder_sample;
use super::lindblad::{evolve_lindblad, Integrator, LindbladOptions};
use super::noise::NoiseModel;
use super::schedule::{evolve_schedule, Schedule, DEFAULT_SCHEDULE_STEP};
use super::unitary::evolve_unitary;
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, C64};
use crate::measurement::{sample_shots, DetectionModel, ShotSet};
use crate::model::{build_ising_in, mask_from_sites, Basis, ChainGeometry, DriveParams, ModelSpace};
use crate::observables::Populations;

/// Everything needed to simulate one quench experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: Option<String>,
    pub geometry: ChainGeometry,
    /// Drive during the evolution window.
    pub drive: DriveParams,
    /// Sites (0-based) that start in the Rydberg state.
    pub excited_sites: Vec<usize>,
    /// Optional preparation sweep from the all-ground state; replaces `excited_sites` as the initial state.
    pub preparation: Option<Schedule>,
    pub times: Vec<f64>,
    pub noise: NoiseModel,
    pub detection: DetectionModel,
    /// Truncate the Hilbert space to N_R ≤ this value.
    pub max_excitations: Option<usize>,
    /// Probability that each addressed site was left in the ground state.
    pub init_error: f64,
    pub integrator: Integrator,
}

impl ExperimentSpec {
    pub fn initial_mask(&self) -> u32 {
        mask_from_sites(&self.excited_sites)
    }

    pub fn n_excitations(&self) -> usize {
        self.excited_sites.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.geometry.len();
        if let Some(&s) = self.excited_sites.iter().find(|&&s| s >= n) {
            return Err(Error::Validation(format!("initial excitation at site {s} of a {n}-site chain")));
        }
        if !(0.0..=1.0).contains(&self.init_error) {
            return Err(Error::Validation(format!("init_error {} outside [0,1]", self.init_error)));
        }
        if self.times.is_empty() {
            return Err(Error::Validation("no output times".into()));
        }
        if let Some(cap) = self.max_excitations {
            if cap < self.excited_sites.len() {
                return Err(Error::Validation(format!(
                    "excitation cap {cap} below the {} initial excitations",
                    self.excited_sites.len()
                )));
            }
        }
        self.drive.check_sites(n)?;
        self.noise.validate()?;
        self.detection.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSettings {
    pub disorder_samples: usize,
    pub shots: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub times: Vec<f64>,
    /// Disorder- and noise-averaged populations before detection.
    pub populations: Vec<Populations>,
    /// Weight outside the initial excitation sector at each time.
    pub leakage: Vec<f64>,
    pub shots: Option<ShotSet>,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
}

/// Product-state mixture produced by independent initialisation failures.
fn initial_mixture(mask: u32, p_fail: f64) -> Vec<(u32, f64)> {
    let sites: Vec<u32> = (0..32).filter(|i| mask >> i & 1 == 1).collect();
    if p_fail == 0.0 {
        return vec![(mask, 1.0)];
    }
    (0u32..1 << sites.len())
        .map(|fail| {
            let k = fail.count_ones() as i32;
            let m = sites
                .iter()
                .enumerate()
                .filter(|(b, _)| fail >> b & 1 == 1)
                .fold(mask, |m, (_, &s)| m & !(1 << s));
            (m, p_fail.powi(k) * (1.0 - p_fail).powi(sites.len() as i32 - k))
        })
        .filter(|e| e.1 > 0.0)
        .collect()
}

struct SampleOutcome {
    populations: Vec<Populations>,
    drift: f64,
    min_eig: f64,
}

fn run_sample(spec: &ExperimentSpec, geom: &ChainGeometry) -> Result<SampleOutcome> {
    let n = geom.len();
    let basis = ModelSpace::new(n, spec.max_excitations)?;
    let h = build_ising_in(geom, &spec.drive, &basis)?;
    let dim = basis.dim();
    let basis_vector = |mask: u32| -> Result<DVector<C64>> {
        let k = basis
            .index_of(mask)
            .ok_or_else(|| Error::Validation(format!("initial state {mask:#b} outside the model space")))?;
        let mut v = DVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Ok(v)
    };

    let pure_components: Vec<(DVector<C64>, f64)> = match &spec.preparation {
        Some(schedule) => {
            let psi = evolve_schedule(geom, schedule, &basis, &basis_vector(0)?, DEFAULT_SCHEDULE_STEP)?;
            vec![(psi, 1.0)]
        }
        None => initial_mixture(spec.initial_mask(), spec.init_error)
            .into_iter()
            .map(|(m, w)| basis_vector(m).map(|v| (v, w)))
            .collect::<Result<_>>()?,
    };

    if !spec.noise.is_dissipative() {
        let mut dense = vec![vec![0.0; 1usize << n]; spec.times.len()];
        for (psi, w) in &pure_components {
            let r = evolve_unitary(&h, psi, &spec.times)?;
            for (slot, s) in dense.iter_mut().zip(&r.states) {
                for k in 0..dim {
                    slot[basis.state(k) as usize] += w * s[k].norm_sqr();
                }
            }
        }
        let populations = dense
            .iter()
            .map(|d| Populations::from_dense(n, d))
            .collect::<Result<_>>()?;
        return Ok(SampleOutcome {
            populations,
            drift: 0.0,
            min_eig: 0.0,
        });
    }

    let mut rho0: DensityMatrix = DMatrix::zeros(dim, dim);
    for (psi, w) in &pure_components {
        rho0 += psi * psi.adjoint() * C64::new(*w, 0.0);
    }
    let opts = LindbladOptions {
        integrator: spec.integrator,
        check_positivity: true,
    };
    let r = evolve_lindblad(&h, &basis, &rho0, &spec.noise, &spec.times, &opts)?;
    let populations = r
        .states
        .iter()
        .map(|rho| Populations::from_density(rho, &basis))
        .collect::<Result<_>>()?;
    Ok(SampleOutcome {
        populations,
        drift: r.series["trace_drift"][0],
        min_eig: r.series["min_eigenvalue"].iter().fold(f64::INFINITY, |m, &v| m.min(v)),
    })
}

/// Disorder-averaged open-system evolution followed by optional shot sampling.
pub fn run_experiment(spec: &ExperimentSpec, settings: &RunSettings) -> Result<ExperimentResult> {
    spec.validate()?;
    if settings.disorder_samples == 0 {
        return Err(Error::Validation("disorder_samples must be at least 1".into()));
    }
    let outcomes: Vec<SampleOutcome> = (0..settings.disorder_samples as u64)
        .into_par_iter()
        .map(|k| {
            let geom = disorder_sample(&spec.geometry, &spec.noise, settings.seed, k)?;
            run_sample(spec, &geom)
        })
        .collect::<Result<_>>()?;

    let populations: Vec<Populations> = (0..spec.times.len())
        .map(|t| {
            let at_t: Vec<Populations> = outcomes.iter().map(|o| o.populations[t].clone()).collect();
            Populations::average(&at_t)
        })
        .collect::<Result<_>>()?;
    let n_r = spec.n_excitations();
    let leakage = populations.iter().map(|p| 1.0 - p.sector_weight(n_r)).collect();

    let shots = if settings.shots > 0 {
        let mut set = ShotSet::new(spec.geometry.len(), settings.seed, spec.name.clone());
        for (t, (time, pop)) in spec.times.iter().zip(&populations).enumerate() {
            let s = sample_shots(pop, &spec.detection, settings.shots, settings.seed, t as u64, *time)?;
            set.records.extend(s.records);
        }
        Some(set)
    } else {
        None
    };

    Ok(ExperimentResult {
        times: spec.times.clone(),
        populations,
        leakage,
        shots,
        max_trace_drift: outcomes.iter().fold(0.0, |m, o| m.max(o.drift)),
        min_eigenvalue: outcomes.iter().fold(f64::INFINITY, |m, o| m.min(o.min_eig)),
    })
}
