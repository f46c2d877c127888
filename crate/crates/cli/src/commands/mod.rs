//! One module per subcommand. Each reads the resolved configuration from the
//! [`Context`](crate::Context) and writes its artifacts through the output directory.

pub mod bands;
pub mod coeffs;
pub mod pair;
pub mod potential;
pub mod verify;
pub mod walk;

use rydmag::dynamics::{run_experiment, ExperimentResult};
use rydmag::measurement::ShotSet;

use crate::config::Resolved;
use crate::error::CliResult;
use crate::output::OutputDir;

/// Run the configured experiment.
pub(crate) fn simulate(r: &Resolved) -> CliResult<ExperimentResult> {
    Ok(run_experiment(&r.spec, &r.settings)?)
}

/// One shot file per output time, `shots/t0000.txt`, ….
pub(crate) fn write_shots(out: &mut OutputDir, shots: &ShotSet) -> CliResult<()> {
    for i in 0..shots.records.len() {
        out.write(&format!("shots/t{i:04}.txt"), "shots", shots.record_text(i).as_bytes())?;
    }
    Ok(())
}
