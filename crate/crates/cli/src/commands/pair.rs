use rydmag::observables::{bond_count, correlator, participation_ratios, uniform_baselines, CorrelatorMap};

use super::walk::{mle_populations, shot_populations};
use super::{simulate, write_shots};
use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::svg::{Heatmap, LinePlot, Series};
use crate::Context;

fn ratios(c: &CorrelatorMap) -> (f64, f64) {
    participation_ratios(c).unwrap_or((f64::NAN, f64::NAN))
}

/// Correlator frames Γ_ij(t) and BR₁/BR₂ series, postselected on N_R = 2
/// before normalising.
pub fn run(ctx: &mut Context) -> CliResult<()> {
    let r = ctx.require()?.clone();
    if r.excited_count() != 2 {
        return Err(CliError::Usage(format!(
            "pair needs exactly two initial excitations, the configuration has {}",
            r.excited_count()
        )));
    }
    let n = r.spec.geometry.len();
    let (base1, base2) = uniform_baselines(n);
    let sim = simulate(&r)?;

    let mut frames = Table::new(&["time_us", "i", "j", "gamma"]);
    let mut br = Table::new(&["time_us", "br1", "br2", "bond_count", "retention", "baseline_br1", "baseline_br2"]);
    let mut br1_pts = Vec::new();
    let mut br2_pts = Vec::new();
    let mut last = None;
    for (t, p) in sim.times.iter().zip(&sim.populations) {
        let (kept, retention) = match p.postselect(2) {
            Ok(x) => x,
            Err(_) => {
                br.push(vec![(*t).into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), 0.0.into(), base1.into(), base2.into()]);
                continue;
            }
        };
        let c = correlator(&kept)?;
        for i in 0..n {
            for j in (i + 1)..n {
                frames.push(vec![(*t).into(), i.into(), j.into(), c.get(i, j).into()]);
            }
        }
        let (b1, b2) = ratios(&c);
        br.push(vec![
            (*t).into(),
            b1.into(),
            b2.into(),
            bond_count(&kept)?.into(),
            retention.into(),
            base1.into(),
            base2.into(),
        ]);
        br1_pts.push((*t, b1));
        br2_pts.push((*t, b2));
        last = Some((*t, c));
    }
    ctx.out.table("correlator", &frames)?;
    ctx.out.table("participation", &br)?;

    let mut shot_series = (Vec::new(), Vec::new());
    if let Some(shots) = &sim.shots {
        write_shots(&mut ctx.out, shots)?;
        let mut frames = Table::new(&["time_us", "i", "j", "gamma", "gamma_mle"]);
        let mut table = Table::new(&["time_us", "br1", "br2", "br1_mle", "br2_mle", "retention", "kept_shots"]);
        for rec in &shots.records {
            let post = shot_populations(&r, &rec.shots)?;
            let mle = mle_populations(&r, &rec.shots)?.map(|p| correlator(&p)).transpose()?;
            let c = post.as_ref().map(|(p, _)| correlator(p)).transpose()?;
            if let Some(c) = &c {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let g_mle = mle.as_ref().map_or(f64::NAN, |m| m.get(i, j));
                        frames.push(vec![rec.time.into(), i.into(), j.into(), c.get(i, j).into(), g_mle.into()]);
                    }
                }
            }
            let (b1, b2) = c.as_ref().map_or((f64::NAN, f64::NAN), ratios);
            let (m1, m2) = mle.as_ref().map_or((f64::NAN, f64::NAN), ratios);
            let ret = post.as_ref().map_or(0.0, |p| p.1);
            let kept = post.as_ref().and_then(|p| p.0.shots()).unwrap_or(0);
            table.push(vec![rec.time.into(), b1.into(), b2.into(), m1.into(), m2.into(), ret.into(), kept.into()]);
            shot_series.0.push((rec.time, b1));
            shot_series.1.push((rec.time, b2));
        }
        ctx.out.table("correlator_shots", &frames)?;
        ctx.out.table("participation_shots", &table)?;
    }

    if let (Some(&(t, b1)), Some(&(_, b2))) = (br1_pts.last(), br2_pts.last()) {
        ctx.summary.push(format!(
            "t = {t} μs: BR₁ = {b1:.4}, BR₂ = {b2:.4} (uniform baselines {base1:.4}, {base2:.4})"
        ));
    }
    if r.plots {
        let mut series = vec![Series::line("BR₁", br1_pts), Series::line("BR₂", br2_pts)];
        if !shot_series.0.is_empty() {
            series.push(Series::scatter("BR₁ shots", shot_series.0));
            series.push(Series::scatter("BR₂ shots", shot_series.1));
        }
        let t_span: Vec<f64> = sim.times.clone();
        let (t0, t1) = (t_span.first().copied().unwrap_or(0.0), t_span.last().copied().unwrap_or(0.0));
        series.push(Series::line("BR₁ uniform", vec![(t0, base1), (t1, base1)]));
        series.push(Series::line("BR₂ uniform", vec![(t0, base2), (t1, base2)]));
        let plot = LinePlot {
            title: "Participation ratios".into(),
            x_label: "t (μs)".into(),
            y_label: "BR".into(),
            series,
            log_y: false,
        };
        ctx.out.svg("participation", plot.render())?;
        if let Some((t, c)) = last {
            let values = (0..n).map(|j| (0..n).map(|i| c.get(i, j)).collect()).collect();
            let h = Heatmap {
                title: format!("Γ_ij at t = {t} μs"),
                x_label: "i".into(),
                y_label: "j".into(),
                x_range: (-0.5, n as f64 - 0.5),
                y_range: (-0.5, n as f64 - 0.5),
                values,
            };
            ctx.out.svg("correlator_final", h.render())?;
        }
    }
    Ok(())
}
