//! TOML experiment configuration. Frequencies are entered as f/2π in MHz,
//! times in μs and lengths in μm. A config may start from a named preset
//! and override any field.

use std::path::Path;

use rydmag::dynamics::{ExperimentSpec, Integrator, NoiseModel, RampSegment, RunSettings, Schedule};
use rydmag::measurement::DetectionModel;
use rydmag::model::{ChainGeometry, DriveParams};
use rydmag::presets::{preset, preset_row, PresetRow};
use rydmag::units::{angular_to_mhz, mhz_to_angular, DEFAULT_C6_MHZ_UM6};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub bands: BandsConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_sites: Option<usize>,
    pub spacing_um: Option<f64>,
    /// Explicit coordinates; overrides `n_sites` and `spacing_um`.
    pub positions_um: Option<Vec<[f64; 3]>>,
    pub c6_mhz_um6: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub omega_mhz: Option<f64>,
    pub delta_mhz: Option<f64>,
    /// Per-site detuning offsets Δ_A,i.
    pub addressing_mhz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// 0-based sites that start in the Rydberg state.
    pub excited_sites: Option<Vec<usize>>,
    /// Per-site probability that preparation left an addressed atom in the ground state.
    pub init_error: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Use the preset's three-stage preparation sweep.
    #[serde(default)]
    pub from_preset: bool,
    #[serde(default)]
    pub segments: Vec<SegmentConfig>,
    pub addressing_mhz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub duration_us: f64,
    pub omega_start_mhz: f64,
    pub omega_end_mhz: f64,
    pub delta_start_mhz: f64,
    pub delta_end_mhz: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseBase {
    #[default]
    None,
    Experimental,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub model: Option<NoiseBase>,
    pub gamma_ind_mhz: Option<f64>,
    pub gamma_col_mhz: Option<f64>,
    pub t1_us: Option<f64>,
    pub sigma_radial_um: Option<f64>,
    pub sigma_axial_um: Option<f64>,
    pub amplitude_damping: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionBase {
    #[default]
    Perfect,
    Experimental,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub model: Option<DetectionBase>,
    pub p_g_given_r: Option<f64>,
    pub p_r_given_g: Option<f64>,
    /// Derive P(g|r) = 1 − exp(−t_trap/t₁) from the trap-off time.
    pub t_trap_us: Option<f64>,
    pub t1_us: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorChoice {
    Taylor,
    Rk4,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub times_us: Option<Vec<f64>>,
    pub t_max_us: Option<f64>,
    pub dt_us: Option<f64>,
    pub shots: Option<usize>,
    pub disorder_samples: Option<usize>,
    pub seed: Option<u64>,
    pub max_excitations: Option<usize>,
    pub integrator: Option<IntegratorChoice>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MsdOrigin {
    /// Centroid of the initially excited sites.
    #[default]
    Initial,
    /// Middle of the chain.
    Center,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub format: Option<Format>,
    pub plots: Option<bool>,
    pub msd_origin: Option<MsdOrigin>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub r_min_um: Option<f64>,
    pub r_max_um: Option<f64>,
    pub points: Option<usize>,
    /// Detunings to sweep; defaults to ±|Δ| of the drive.
    pub delta_mhz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    pub k_points: Option<usize>,
    pub r_max: Option<usize>,
    pub hop_range: Option<usize>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub shots: Option<usize>,
    pub disorder_samples: Option<usize>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSettings {
    pub r_min_um: f64,
    pub r_max_um: f64,
    pub points: usize,
    pub delta_mhz: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSettings {
    pub k_points: usize,
    pub r_max: usize,
    pub hop_range: usize,
}

/// Fully resolved configuration in internal units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub spec: ExperimentSpec,
    pub settings: RunSettings,
    pub format: Format,
    pub plots: bool,
    pub msd_origin: MsdOrigin,
    pub potential: PotentialSettings,
    pub bands: BandSettings,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text, path)
    }

    /// Layer preset, file values and command-line overrides, then validate.
    pub fn resolve(&self, overrides: &Overrides) -> CliResult<Resolved> {
        let name = overrides.preset.clone().or_else(|| self.preset.clone());
        let (base, row) = match &name {
            Some(n) => (Some(preset(n)?), Some(preset_row(n)?)),
            None => (None, None),
        };
        let geometry = self.geometry(base.as_ref())?;
        let n = geometry.len();
        let drive = self.drive(base.as_ref(), n)?;
        let excited_sites = match (&self.initial.excited_sites, &base) {
            (Some(s), _) => s.clone(),
            (None, Some(b)) => b.excited_sites.clone(),
            (None, None) => Vec::new(),
        };
        let preparation = self.schedule(row.as_ref(), n)?;
        let times = self.times(base.as_ref())?;
        let integrator = match self.run.integrator {
            Some(IntegratorChoice::Rk4) => Integrator::rk4(),
            Some(IntegratorChoice::Taylor) | None => Integrator::default(),
        };
        let spec = ExperimentSpec {
            name: name.clone(),
            geometry,
            drive,
            excited_sites,
            preparation,
            times,
            noise: self.noise()?,
            detection: self.detection()?,
            max_excitations: self.run.max_excitations,
            init_error: self.initial.init_error.unwrap_or(0.0),
            integrator,
        };
        spec.validate()?;
        let settings = RunSettings {
            disorder_samples: overrides.disorder_samples.or(self.run.disorder_samples).unwrap_or(1),
            shots: overrides.shots.or(self.run.shots).unwrap_or(0),
            seed: overrides.seed.or(self.run.seed).unwrap_or(0),
        };
        if settings.disorder_samples == 0 {
            return Err(CliError::Usage("disorder samples must be at least 1".into()));
        }
        let delta_default = angular_to_mhz(spec.drive.delta).abs();
        let potential = PotentialSettings {
            r_min_um: self.potential.r_min_um.unwrap_or(4.4),
            r_max_um: self.potential.r_max_um.unwrap_or(9.9),
            points: self.potential.points.unwrap_or(221),
            delta_mhz: self
                .potential
                .delta_mhz
                .clone()
                .unwrap_or_else(|| if delta_default > 0.0 { vec![delta_default, -delta_default] } else { vec![] }),
        };
        if !(potential.r_min_um > 0.0 && potential.r_max_um > potential.r_min_um) || potential.points < 2 {
            return Err(CliError::Usage("potential range needs 0 < r_min < r_max and at least 2 points".into()));
        }
        let bands = BandSettings {
            k_points: self.bands.k_points.unwrap_or(rydmag::spectra::DEFAULT_K_POINTS),
            r_max: self.bands.r_max.unwrap_or(rydmag::spectra::DEFAULT_R_MAX),
            hop_range: self.bands.hop_range.unwrap_or(rydmag::spectra::DEFAULT_HOP_RANGE),
        };
        Ok(Resolved {
            spec,
            settings,
            format: overrides.format.or(self.outputs.format).unwrap_or_default(),
            plots: self.outputs.plots.unwrap_or(true),
            msd_origin: self.outputs.msd_origin.unwrap_or_default(),
            potential,
            bands,
        })
    }

    fn geometry(&self, base: Option<&ExperimentSpec>) -> CliResult<ChainGeometry> {
        let g = &self.geometry;
        let c6 = match (g.c6_mhz_um6, base) {
            (Some(c), _) => mhz_to_angular(c),
            (None, Some(b)) => b.geometry.c6(),
            (None, None) => mhz_to_angular(DEFAULT_C6_MHZ_UM6),
        };
        if let Some(p) = &g.positions_um {
            return Ok(ChainGeometry::new(p.clone(), c6)?);
        }
        let n = g.n_sites.or(base.map(|b| b.geometry.len()));
        let a = g.spacing_um.or(base.and_then(|b| b.geometry.uniform_spacing()));
        match (n, a) {
            (Some(n), Some(a)) => Ok(ChainGeometry::uniform_chain(n, a, c6)?),
            _ => Err(CliError::Usage(
                "geometry needs a preset, explicit positions_um, or n_sites with spacing_um".into(),
            )),
        }
    }

    fn drive(&self, base: Option<&ExperimentSpec>, n_sites: usize) -> CliResult<DriveParams> {
        let d = &self.drive;
        let omega = d.omega_mhz.map(mhz_to_angular).or(base.map(|b| b.drive.omega));
        let delta = d.delta_mhz.map(mhz_to_angular).or(base.map(|b| b.drive.delta));
        let (Some(omega), Some(delta)) = (omega, delta) else {
            return Err(CliError::Usage("drive needs omega_mhz and delta_mhz (or a preset)".into()));
        };
        let mut drive = DriveParams::new(omega, delta)?;
        if let Some(a) = &d.addressing_mhz {
            if a.len() != n_sites {
                return Err(CliError::Usage(format!(
                    "drive.addressing_mhz has {} entries for {n_sites} sites",
                    a.len()
                )));
            }
            drive = drive.with_addressing(a.iter().map(|&x| mhz_to_angular(x)).collect());
        } else if let Some(b) = base {
            drive = drive.with_addressing(b.drive.addressing.clone());
        }
        Ok(drive)
    }

    fn schedule(&self, row: Option<&PresetRow>, n_sites: usize) -> CliResult<Option<Schedule>> {
        let Some(s) = &self.schedule else {
            return Ok(None);
        };
        if s.from_preset {
            let prep = row.and_then(|r| r.preparation()).ok_or_else(|| {
                CliError::Usage("schedule.from_preset needs a preset with a preparation sweep".into())
            })?;
            return Ok(Some(prep));
        }
        if s.segments.is_empty() {
            return Ok(None);
        }
        let addressing = match &s.addressing_mhz {
            Some(a) if a.len() == n_sites => a.iter().map(|&x| mhz_to_angular(x)).collect(),
            Some(a) => {
                return Err(CliError::Usage(format!(
                    "schedule.addressing_mhz has {} entries for {n_sites} sites",
                    a.len()
                )))
            }
            None => vec![0.0; n_sites],
        };
        let schedule = Schedule {
            segments: s
                .segments
                .iter()
                .map(|g| RampSegment {
                    duration: g.duration_us,
                    omega_start: mhz_to_angular(g.omega_start_mhz),
                    omega_end: mhz_to_angular(g.omega_end_mhz),
                    delta_start: mhz_to_angular(g.delta_start_mhz),
                    delta_end: mhz_to_angular(g.delta_end_mhz),
                })
                .collect(),
            addressing,
        };
        schedule.validate()?;
        Ok(Some(schedule))
    }

    fn times(&self, base: Option<&ExperimentSpec>) -> CliResult<Vec<f64>> {
        let r = &self.run;
        if let Some(t) = &r.times_us {
            return Ok(t.clone());
        }
        match (r.t_max_us, r.dt_us) {
            (Some(t_max), Some(dt)) => {
                if !(dt > 0.0 && t_max >= 0.0) {
                    return Err(CliError::Usage(format!("need dt_us > 0 and t_max_us >= 0 (got {dt}, {t_max})")));
                }
                let n = (t_max / dt).round() as usize;
                Ok((0..=n).map(|k| k as f64 * dt).collect())
            }
            (None, None) => Ok(base.map(|b| b.times.clone()).unwrap_or_else(|| vec![0.0])),
            _ => Err(CliError::Usage("run.t_max_us and run.dt_us go together".into())),
        }
    }

    fn noise(&self) -> CliResult<NoiseModel> {
        let c = &self.noise;
        let mut m = match c.model.unwrap_or_default() {
            NoiseBase::None => NoiseModel::none(),
            NoiseBase::Experimental => NoiseModel::experimental(),
        };
        if let Some(x) = c.gamma_ind_mhz {
            m.gamma_ind = mhz_to_angular(x);
        }
        if let Some(x) = c.gamma_col_mhz {
            m.gamma_col = mhz_to_angular(x);
        }
        if let Some(x) = c.t1_us {
            m.t1_rydberg = x;
        }
        if let Some(x) = c.sigma_radial_um {
            m.sigma_radial = x;
        }
        if let Some(x) = c.sigma_axial_um {
            m.sigma_axial = x;
        }
        if let Some(x) = c.amplitude_damping {
            m.amplitude_damping = x;
        }
        m.validate()?;
        Ok(m)
    }

    fn detection(&self) -> CliResult<DetectionModel> {
        let c = &self.detection;
        let base = match c.model.unwrap_or_default() {
            DetectionBase::Perfect => DetectionModel::perfect(),
            DetectionBase::Experimental => DetectionModel::experimental(),
        };
        let p_rg = c.p_r_given_g.unwrap_or(base.p_r_given_g);
        let d = match (c.t_trap_us, c.p_g_given_r) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either detection.t_trap_us or detection.p_g_given_r".into()))
            }
            (Some(t_trap), None) => DetectionModel::from_lifetime(t_trap, c.t1_us.unwrap_or(43.0), p_rg)?,
            (None, Some(p)) => DetectionModel::new(p, p_rg)?,
            (None, None) => DetectionModel { p_r_given_g: p_rg, ..base },
        };
        d.validate()?;
        Ok(d)
    }
}

impl Resolved {
    /// Human-readable record of how the quoted frequencies were interpreted.
    pub fn unit_echo(&self) -> Vec<String> {
        let d = &self.spec.drive;
        let mut lines = vec![
            "frequencies are read as f/2pi in MHz and used internally as angular frequencies in rad/us".to_string(),
            format!(
                "Omega/2pi = {:.6} MHz -> Omega = {:.6} rad/us",
                angular_to_mhz(d.omega),
                d.omega
            ),
            format!(
                "Delta/2pi = {:.6} MHz -> Delta = {:.6} rad/us",
                angular_to_mhz(d.delta),
                d.delta
            ),
            format!(
                "C6/2pi = {:.6e} MHz um^6 -> C6 = {:.6e} rad/us um^6",
                angular_to_mhz(self.spec.geometry.c6()),
                self.spec.geometry.c6()
            ),
        ];
        if d.has_addressing() {
            let mhz: Vec<String> = d.addressing.iter().map(|a| format!("{:.4}", angular_to_mhz(*a))).collect();
            lines.push(format!("Delta_A/2pi = [{}] MHz", mhz.join(", ")));
        }
        let n = &self.spec.noise;
        if n.is_dissipative() {
            lines.push(format!(
                "gamma_ind/2pi = {:.4} MHz -> {:.6} rad/us, gamma_col/2pi = {:.4} MHz -> {:.6} rad/us",
                angular_to_mhz(n.gamma_ind),
                n.gamma_ind,
                angular_to_mhz(n.gamma_col),
                n.gamma_col
            ));
        }
        lines
    }

    pub fn excited_count(&self) -> usize {
        self.spec.excited_sites.len()
    }
}
