//! Closed and open-system time evolution, the HRS transport reference,
//! positional disorder and time-dependent drive schedules.

pub mod compare;
pub mod disorder;
pub mod experiment;
pub mod hrs;
pub mod lindblad;
pub mod noise;
pub mod schedule;
pub mod unitary;

pub use compare::{compare_with_exact, SectorComparison, COMPARE_MAX_SITES};
pub use disorder::{disorder_ensemble, disorder_sample, displacement_sample, nn_coupling_spread};
pub use experiment::*;
pub use hrs::{hrs_msd, hrs_msd_from, hrs_msd_infinite, local_exponent};
pub use lindblad::{
    evolve_lindblad, evolve_with, min_eigenvalue, pure_density, Integrator, LindbladOptions, Lindbladian,
    TRACE_REJECT,
};
pub use noise::NoiseModel;
pub use schedule::{evolve_schedule, RampSegment, Schedule, DEFAULT_SCHEDULE_STEP};
pub use unitary::{evolve_unitary, krylov_evolve, lanczos_step, EigenPropagator, EvolutionResult, DENSE_EIGEN_MAX_DIM};
