use std::sync::Arc;

use rydmag::spectra::{
    branch_bandwidth, classify_bound_states, compute_bands, initial_overlap, k_grid, Branch, DressedChain,
    OverlapMethod,
};
use rydmag::units::angular_to_mhz;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::svg::{LinePlot, Series};
use crate::Context;

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Tight => "tight",
        Branch::Loose => "loose",
    }
}

/// Two-magnon spectrum of the infinite dressed chain with the configured
/// spacing and drive, bound-state classification and wavefunctions.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let r = ctx.require()?.clone();
    let g = &r.spec.geometry;
    let spacing = g
        .uniform_spacing()
        .ok_or_else(|| CliError::Usage("bands needs a uniform chain".into()))?;
    let d = &r.spec.drive;
    let model = DressedChain::new(d.omega, d.delta, spacing, g.c6())?.with_hop_range(r.bands.hop_range);
    let bands = compute_bands(Arc::new(model), &k_grid(r.bands.k_points), r.bands.r_max)?;
    let bound = classify_bound_states(&bands)?;

    let mut spectrum = Table::new(&["k", "band", "energy_rad_per_us", "energy_mhz", "continuum_lo", "continuum_hi"]);
    for s in &bands.slices {
        for (b, e) in s.energies.iter().enumerate() {
            spectrum.push(vec![
                s.k.into(),
                b.into(),
                (*e).into(),
                angular_to_mhz(*e).into(),
                s.continuum.0.into(),
                s.continuum.1.into(),
            ]);
        }
    }
    ctx.out.table("spectrum", &spectrum)?;

    let mut states = Table::new(&["branch", "k", "band", "energy_rad_per_us", "bond_length", "localization"]);
    let mut waves = Table::new(&["branch", "k", "band", "r", "phi"]);
    for b in &bound {
        states.push(vec![
            branch_name(b.branch).into(),
            b.k.into(),
            b.band.into(),
            b.energy.into(),
            b.bond_length.into(),
            b.localization.into(),
        ]);
        let slice = bands.slices.iter().find(|s| s.k == b.k).expect("bound state momentum on the grid");
        for (i, phi) in slice.wavefunctions[b.band].iter().enumerate() {
            waves.push(vec![branch_name(b.branch).into(), b.k.into(), b.band.into(), (i + 1).into(), (*phi).into()]);
        }
    }
    ctx.out.table("bound_states", &states)?;
    ctx.out.table("bound_wavefunctions", &waves)?;

    let tight_w = branch_bandwidth(&bound, Branch::Tight);
    let loose_w = branch_bandwidth(&bound, Branch::Loose);
    let mut summary = json!({
        "spacing_um": spacing,
        "k_points": r.bands.k_points,
        "r_max": r.bands.r_max,
        "hop_range": r.bands.hop_range,
        "bound_states": bound.len(),
        "tight_bandwidth_rad_per_us": tight_w,
        "loose_bandwidth_rad_per_us": loose_w,
    });
    if let [a, b] = r.spec.excited_sites[..] {
        let r0 = a.abs_diff(b);
        let inf = initial_overlap(r0, &bands, OverlapMethod::InfiniteChain)?;
        let sw = initial_overlap(r0, &bands, OverlapMethod::StandingWave { chain_length: g.len() })?;
        summary["initial_separation"] = json!(r0);
        summary["overlap_infinite_chain"] = json!(inf);
        summary["overlap_standing_wave"] = json!(sw);
        ctx.summary.push(format!(
            "pair at r₀ = {r0}: tight weight {:.4}, loose weight {:.4} (open chain of {})",
            sw.tight,
            sw.loose,
            g.len()
        ));
    }
    ctx.out.json("bands_summary.json", "summary", &summary)?;
    ctx.summary.push(format!(
        "{} bound states; tight bandwidth {}, loose bandwidth {} rad/μs",
        bound.len(),
        tight_w.map_or("n/a".into(), |w| format!("{w:.6}")),
        loose_w.map_or("n/a".into(), |w| format!("{w:.6}")),
    ));

    if r.plots {
        let lo = bands.slices.iter().map(|s| (s.k, s.continuum.0)).collect();
        let hi = bands.slices.iter().map(|s| (s.k, s.continuum.1)).collect();
        let mut series = vec![Series::line("continuum lower edge", lo), Series::line("continuum upper edge", hi)];
        for branch in [Branch::Tight, Branch::Loose] {
            let pts: Vec<(f64, f64)> = bound.iter().filter(|b| b.branch == branch).map(|b| (b.k, b.energy)).collect();
            if !pts.is_empty() {
                series.push(Series::scatter(branch_name(branch), pts));
            }
        }
        let plot = LinePlot {
            title: "Two-magnon spectrum".into(),
            x_label: "K".into(),
            y_label: "E (rad/μs)".into(),
            series,
            log_y: false,
        };
        ctx.out.svg("spectrum", plot.render())?;
    }
    Ok(())
}
