use rydmag::measurement::{mle_spam_correct, MleOptions, MLE_MAX_SITES};
use rydmag::observables::{density_standard_errors, mean_square_displacement, rydberg_density, Populations};

use super::{simulate, write_shots};
use crate::config::{MsdOrigin, Resolved};
use crate::error::CliResult;
use crate::output::Table;
use crate::svg::{Heatmap, LinePlot, Series};
use crate::Context;

pub(crate) fn msd_origin(r: &Resolved) -> f64 {
    let n = r.spec.geometry.len();
    let sites = &r.spec.excited_sites;
    match r.msd_origin {
        MsdOrigin::Initial if !sites.is_empty() => sites.iter().sum::<usize>() as f64 / sites.len() as f64,
        _ => (n as f64 - 1.0) / 2.0,
    }
}

/// Postselected populations from one shot record, or `None` when nothing survives.
pub(crate) fn shot_populations(r: &Resolved, shots: &[u32]) -> CliResult<Option<(Populations, f64)>> {
    let n = r.spec.geometry.len();
    if shots.is_empty() {
        return Ok(None);
    }
    let raw = Populations::from_shots(n, shots)?;
    Ok(raw.postselect(r.excited_count()).ok())
}

/// SPAM-corrected and then postselected populations, when the detection
/// model is imperfect and the chain is small enough for the estimator.
pub(crate) fn mle_populations(r: &Resolved, shots: &[u32]) -> CliResult<Option<Populations>> {
    let n = r.spec.geometry.len();
    if r.spec.detection.is_perfect() || n > MLE_MAX_SITES || shots.is_empty() {
        return Ok(None);
    }
    let est = mle_spam_correct(n, shots, &r.spec.detection, &MleOptions::default())?;
    let p = Populations::from_dense(n, &est.populations)?;
    Ok(p.postselect(r.excited_count()).ok().map(|x| x.0))
}

pub fn run(ctx: &mut Context) -> CliResult<()> {
    let r = ctx.require()?.clone();
    let n = r.spec.geometry.len();
    let n_r = r.excited_count();
    let origin = msd_origin(&r);
    let sim = simulate(&r)?;

    let mut dens = Table::new(&["time_us", "site", "density", "density_postselected"]);
    let mut msd = Table::new(&["time_us", "msd", "leakage"]);
    let mut heat = Vec::new();
    let mut msd_pts = Vec::new();
    for (t, p) in sim.times.iter().zip(&sim.populations) {
        let d = rydberg_density(p)?;
        let post = p.postselect(n_r).ok().map(|(q, _)| rydberg_density(&q)).transpose()?;
        for i in 0..n {
            let ps = post.as_ref().map_or(f64::NAN, |v| v[i]);
            dens.push(vec![(*t).into(), i.into(), d[i].into(), ps.into()]);
        }
        let m = post.as_ref().map_or(f64::NAN, |v| mean_square_displacement(v, origin, n_r));
        msd.push(vec![(*t).into(), m.into(), (1.0 - p.sector_weight(n_r)).into()]);
        msd_pts.push((*t, m));
        heat.push(post.unwrap_or(d));
    }
    ctx.out.table("density", &dens)?;
    ctx.out.table("msd", &msd)?;

    let mut shot_series = Vec::new();
    if let Some(shots) = &sim.shots {
        write_shots(&mut ctx.out, shots)?;
        let mut table = Table::new(&["time_us", "site", "density", "stderr", "density_mle", "retention"]);
        let mut msd_shots = Table::new(&["time_us", "msd", "msd_mle", "retention"]);
        for rec in &shots.records {
            let post = shot_populations(&r, &rec.shots)?;
            let mle = mle_populations(&r, &rec.shots)?.map(|p| rydberg_density(&p)).transpose()?;
            let (d, se, ret) = match &post {
                Some((p, ret)) => (Some(rydberg_density(p)?), density_standard_errors(p), *ret),
                None => (None, None, 0.0),
            };
            for i in 0..n {
                table.push(vec![
                    rec.time.into(),
                    i.into(),
                    d.as_ref().map_or(f64::NAN, |v| v[i]).into(),
                    se.as_ref().map_or(f64::NAN, |v| v[i]).into(),
                    mle.as_ref().map_or(f64::NAN, |v| v[i]).into(),
                    ret.into(),
                ]);
            }
            let m = d.as_ref().map_or(f64::NAN, |v| mean_square_displacement(v, origin, n_r));
            let mm = mle.as_ref().map_or(f64::NAN, |v| mean_square_displacement(v, origin, n_r));
            msd_shots.push(vec![rec.time.into(), m.into(), mm.into(), ret.into()]);
            shot_series.push((rec.time, m));
        }
        ctx.out.table("density_shots", &table)?;
        ctx.out.table("msd_shots", &msd_shots)?;
    }

    if let Some(&(t, m)) = msd_pts.last() {
        ctx.summary.push(format!("⟨x²⟩ at t = {t} μs: {m:.6} sites² (origin {origin})"));
    }
    if r.plots {
        let t_max = sim.times.last().copied().unwrap_or(0.0);
        let h = Heatmap {
            title: "Rydberg density ⟨n_i⟩".into(),
            x_label: "site".into(),
            y_label: "t (μs)".into(),
            x_range: (-0.5, n as f64 - 0.5),
            y_range: (0.0, t_max),
            values: heat,
        };
        ctx.out.svg("density", h.render())?;
        let mut series = vec![Series::line("exact", msd_pts)];
        if !shot_series.is_empty() {
            series.push(Series::scatter("shots", shot_series));
        }
        let plot = LinePlot {
            title: "Mean-square displacement".into(),
            x_label: "t (μs)".into(),
            y_label: "⟨x²⟩ (sites²)".into(),
            series,
            log_y: false,
        };
        ctx.out.svg("msd", plot.render())?;
    }
    Ok(())
}
