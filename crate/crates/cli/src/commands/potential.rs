use rydmag::effective::{dressing_potential, dressing_radius};
use rydmag::units::{angular_to_mhz, mhz_to_angular};
use serde::Serialize;

use crate::error::CliResult;
use crate::output::Table;
use crate::svg::{LinePlot, Series};
use crate::Context;

#[derive(Serialize)]
struct Branch {
    delta_mhz: f64,
    /// Facilitation distance where J diverges (Δ > 0 only).
    divergence_um: Option<f64>,
    /// Soft-core radius where |J| falls to half its plateau (Δ < 0 only).
    soft_core_um: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    omega_mhz: f64,
    c6_mhz_um6: f64,
    branches: Vec<Branch>,
    skipped_points: usize,
}

/// J(r) on a uniform radial grid for each requested detuning. Points that
/// land on the Δ > 0 divergence are skipped and counted.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let r = ctx.require()?.clone();
    let (omega, c6) = (r.spec.drive.omega, r.spec.geometry.c6());
    let p = &r.potential;
    let grid: Vec<f64> = (0..p.points)
        .map(|k| p.r_min_um + (p.r_max_um - p.r_min_um) * k as f64 / (p.points - 1) as f64)
        .collect();

    let mut table = Table::new(&["delta_mhz", "r_um", "j_rad_per_us", "j_mhz", "abs_j_mhz"]);
    let mut series = Vec::new();
    let mut branches = Vec::new();
    let mut skipped = 0;
    for &d_mhz in &p.delta_mhz {
        let delta = mhz_to_angular(d_mhz);
        let rc = dressing_radius(delta, c6)?;
        let mut pts = Vec::new();
        for &x in &grid {
            match dressing_potential(x, omega, delta, c6) {
                Ok(j) => {
                    let jm = angular_to_mhz(j);
                    table.push(vec![d_mhz.into(), x.into(), j.into(), jm.into(), jm.abs().into()]);
                    pts.push((x, jm.abs()));
                }
                Err(rydmag::Error::Resonance { .. }) => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
        series.push(Series::line(format!("Δ/2π = {d_mhz} MHz"), pts));
        branches.push(Branch {
            delta_mhz: d_mhz,
            divergence_um: (delta > 0.0).then_some(rc),
            soft_core_um: (delta < 0.0).then_some(rc),
        });
        if delta > 0.0 {
            ctx.summary.push(format!("Δ/2π = {d_mhz} MHz: J diverges at r_c = {rc:.4} μm"));
        }
    }
    ctx.out.table("potential", &table)?;
    ctx.out.json(
        "potential_summary.json",
        "summary",
        &Summary {
            omega_mhz: angular_to_mhz(omega),
            c6_mhz_um6: angular_to_mhz(c6),
            branches,
            skipped_points: skipped,
        },
    )?;
    if r.plots {
        let plot = LinePlot {
            title: "Dressed exchange |J|/2π".into(),
            x_label: "r (μm)".into(),
            y_label: "|J|/2π (MHz)".into(),
            series,
            log_y: true,
        };
        ctx.out.svg("potential", plot.render())?;
    }
    Ok(())
}
