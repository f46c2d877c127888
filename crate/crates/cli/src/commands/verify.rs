use rydmag::dynamics::{run_experiment, RunSettings};
use rydmag::effective::{
    bond_number, build_effective_sector, coeff_j, dressing_potential, relative_deviation, sw_oracle,
    EffectiveOptions, Onsite,
};
use rydmag::linalg::require_hermitian;
use rydmag::measurement::{mle_spam_correct, sample_with, DetectionModel, MleOptions};
use rydmag::model::{build_ising_hamiltonian, Basis, ChainGeometry, DriveParams};
use rydmag::observables::Populations;
use rydmag::presets::{noisy_preset, preset, PRESET_NAMES};
use rydmag::rng::{stream, Component};
use rydmag::units::mhz_to_angular;
use rydmag::Error;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::Context;

pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
    pub cases: usize,
}

fn check(name: &str, value: f64, tolerance: f64, cases: usize) -> Check {
    Check {
        name: name.into(),
        passed: value <= tolerance,
        value,
        tolerance,
        cases,
    }
}

/// Closed-form effective Hamiltonians against brute-force Schrieffer–Wolff on a
/// grid of chains, skipping resonant parameters.
fn oracle_suite() -> CliResult<Vec<Check>> {
    let exact = EffectiveOptions::default().with_onsite(Onsite::Exact);
    let mut out = Vec::new();
    for n_r in [1usize, 2] {
        let (mut worst, mut cases) = (0.0f64, 0);
        for n in 2..=6 {
            if n_r > n {
                continue;
            }
            for spacing in [4.5, 6.0, 8.0] {
                for ratio in [-4.0, -3.0, -2.0, 2.0, 3.0, 4.0] {
                    let g = ChainGeometry::default_chain(n, spacing)?;
                    let d = DriveParams::from_mhz(1.5, 1.5 * ratio)?;
                    let built = build_effective_sector(&g, &d, n_r, &exact).and_then(|h| Ok((h.0, sw_oracle(&g, &d, n_r)?.0)));
                    match built {
                        Ok((h, o)) => {
                            worst = worst.max(relative_deviation(&h, &o));
                            cases += 1;
                        }
                        Err(Error::Resonance { .. }) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        out.push(check(&format!("sw_oracle_n_r_{n_r}"), worst, ORACLE_TOLERANCE, cases));
    }
    Ok(out)
}

fn hermiticity() -> CliResult<Check> {
    let mut worst = 0.0f64;
    for name in PRESET_NAMES {
        let s = preset(name)?;
        let h = build_ising_hamiltonian(&s.geometry, &s.drive)?;
        require_hermitian(&h)?;
        worst = worst.max(h.max_asymmetry());
        if s.geometry.len() <= 8 {
            let (he, _) = build_effective_sector(&s.geometry, &s.drive, 2.min(s.geometry.len()), &EffectiveOptions::default())?;
            worst = worst.max(he.max_asymmetry());
        }
    }
    Ok(check("hamiltonians_symmetric", worst, 1e-12, PRESET_NAMES.len()))
}

fn bond_conservation() -> CliResult<Check> {
    let g = ChainGeometry::default_chain(7, 4.95)?;
    let d = DriveParams::from_mhz(2.06, -3.0)?;
    let mut violations = 0usize;
    let mut cases = 0;
    for n_r in 2..=3 {
        let (h, basis) = build_effective_sector(&g, &d, n_r, &EffectiveOptions::nearest_neighbour())?;
        for (a, b, v) in h.iter() {
            if a != b && v != 0.0 && bond_number(basis.state(a)) != bond_number(basis.state(b)) {
                violations += 1;
            }
        }
        cases += 1;
    }
    Ok(check("nearest_neighbour_bonds_conserved", violations as f64, 0.0, cases))
}

fn potential_identity() -> CliResult<Check> {
    let c6 = mhz_to_angular(rydmag::units::DEFAULT_C6_MHZ_UM6);
    let omega = mhz_to_angular(1.52);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for delta_mhz in [5.0, -5.0] {
        let delta = mhz_to_angular(delta_mhz);
        for k in 0..=110 {
            let r = 4.4 + 0.05 * k as f64;
            let (Ok(a), Ok(b)) = (dressing_potential(r, omega, delta, c6), coeff_j(omega, delta, c6 / r.powi(6))) else {
                continue;
            };
            worst = worst.max((a - b).abs() / b.abs().max(1e-300));
            cases += 1;
        }
    }
    Ok(check("dressing_potential_equals_coefficient", worst, 1e-12, cases))
}

/// Trace, positivity and probability conservation on short noisy and clean runs.
fn dynamics_invariants() -> CliResult<Vec<Check>> {
    let settings = RunSettings {
        disorder_samples: 1,
        shots: 0,
        seed: 1,
    };
    let mut noisy = noisy_preset("two-atom-exchange")?;
    noisy.times.truncate(11);
    let res = run_experiment(&noisy, &settings)?;
    let mut clean = preset("quantum-walk")?;
    clean.times.truncate(11);
    let walk = run_experiment(&clean, &settings)?;
    let norm = res
        .populations
        .iter()
        .chain(&walk.populations)
        .map(|p| (p.total() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        check("lindblad_trace_preserved", res.max_trace_drift, 1e-8, res.times.len()),
        check("lindblad_positive", (-res.min_eigenvalue).max(0.0), 1e-8, res.times.len()),
        check("populations_normalised", norm, 1e-8, res.times.len() + walk.times.len()),
    ])
}

/// SPAM-corrected estimate from sampled shots lies on the simplex near the truth.
fn mle_recovery(seed: u64) -> CliResult<Check> {
    let truth = Populations::new(2, vec![(0b00, 0.1), (0b01, 0.4), (0b10, 0.3), (0b11, 0.2)])?;
    let det = DetectionModel::experimental();
    let shots = sample_with(&truth, &det, 200_000, &mut stream(seed, Component::Synthetic, 0))?;
    let est = mle_spam_correct(2, &shots, &det, &MleOptions::default())?;
    let off_simplex = est.populations.iter().map(|p| (-p).max(0.0)).sum::<f64>()
        + (est.populations.iter().sum::<f64>() - 1.0).abs();
    let err = truth
        .to_dense()
        .iter()
        .zip(&est.populations)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(check("mle_recovers_populations", err.max(off_simplex), 0.01, 1))
}

pub fn run(ctx: &mut Context) -> CliResult<()> {
    let seed = ctx.resolved.as_ref().map_or(0, |r| r.settings.seed);
    let mut checks = oracle_suite()?;
    checks.push(hermiticity()?);
    checks.push(bond_conservation()?);
    checks.push(potential_identity()?);
    checks.extend(dynamics_invariants()?);
    checks.push(mle_recovery(seed)?);

    let mut table = Table::new(&["check", "passed", "value", "tolerance", "cases"]);
    for c in &checks {
        table.push(vec![
            c.name.as_str().into(),
            (if c.passed { "true" } else { "false" }).into(),
            c.value.into(),
            c.tolerance.into(),
            c.cases.into(),
        ]);
        ctx.summary.push(format!(
            "{} {}: {:e} (tolerance {:e}, {} cases)",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.cases
        ));
    }
    ctx.out.table("verify", &table)?;
    let passed = checks.iter().all(|c| c.passed);
    ctx.out.json(
        "verify.json",
        "report",
        &serde_json::json!({ "passed": passed, "checks": checks }),
    )?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::VerifyFailed(failed.join(", ")))
    }
}
