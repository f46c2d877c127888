//! One PASS/FAIL line per acceptance criterion. A failing criterion is
//! reported, not hidden; the process exits nonzero only if the harness itself
//! cannot run.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rydmag::dynamics::{
    compare_with_exact, evolve_lindblad, evolve_unitary, hrs_msd, local_exponent, pure_density, run_experiment,
    LindbladOptions, NoiseModel, RunSettings,
};
use rydmag::effective::{
    anisotropies, build_effective_sector, build_effective_single_magnon_with, build_effective_two_magnon_with,
    coeff_j, dressing_potential, dressing_radius, relative_deviation, single_magnon_default, sw_oracle,
    EffectiveCoefficients, EffectiveOptions, Onsite,
};
use rydmag::linalg::C64;
use rydmag::measurement::{mle_spam_correct, postselect, sample_shots, DetectionModel, MleOptions};
use rydmag::model::{mask_from_sites, Basis, ChainGeometry, DriveParams, SectorBasis};
use rydmag::observables::{correlator, oscillation_frequency, participation_ratios, uniform_baselines, Populations};
use rydmag::presets::{bound_state_theory_spacing, noisy_preset, preset};
use rydmag::rng::{stream, Component};
use rydmag::spectra::{
    branch_bandwidth, classify_bound_states, compute_bands, initial_overlap, k_grid, Branch, DressedChain,
    OverlapMethod, DEFAULT_K_POINTS, DEFAULT_R_MAX,
};
use rydmag::units::{angular_to_mhz, mhz_to_angular, DEFAULT_C6_MHZ_UM6};
use serde_json::Value;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    ((x - target) / target).abs() <= rel
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISS"
    }
}

fn settings(shots: usize, seed: u64) -> RunSettings {
    RunSettings {
        disorder_samples: 1,
        shots,
        seed,
    }
}

fn rydmag_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_rydmag"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(e)?;
    if o.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).into_owned())
    }
}

fn c6() -> f64 {
    mhz_to_angular(DEFAULT_C6_MHZ_UM6)
}

fn chain_bands(omega_mhz: f64, delta_mhz: f64, a: f64) -> Result<rydmag::spectra::TwoMagnonBands, String> {
    let model = DressedChain::new(mhz_to_angular(omega_mhz), mhz_to_angular(delta_mhz), a, c6()).map_err(e)?;
    compute_bands(Arc::new(model), &k_grid(DEFAULT_K_POINTS), DEFAULT_R_MAX).map_err(e)
}

fn start_in(basis: &SectorBasis, sites: &[usize]) -> DVector<C64> {
    let mut v = DVector::zeros(basis.dim());
    v[basis.rank(mask_from_sites(sites)).expect("sites in sector")] = C64::new(1.0, 0.0);
    v
}

fn c1_coefficients() -> Outcome {
    let tmp = tempfile::tempdir().map_err(e)?;
    let aniso = |name: &str| -> Result<Value, String> {
        let dir = tmp.path().join(name);
        rydmag_cli(&["coeffs", "--preset", name], &dir)?;
        serde_json::from_slice(&std::fs::read(dir.join("anisotropy.json")).map_err(e)?).map_err(e)
    };
    let theory = aniso("bound-state-theory")?;
    let tight = aniso("tight-pair-transport")?;
    let loose = aniso("loose-pair-transport")?;
    let free = aniso("loose-pair-free")?;
    let f = |v: &Value, k: &str| v[k].as_f64().unwrap_or(f64::NAN);
    let checks = [
        ("theory xi1", f(&theory, "xi1"), 684.0, 0.02),
        ("theory xi2", f(&theory, "xi2"), 4.0, 0.25),
        ("tight xi1", f(&tight, "xi1"), -35.0, 0.05),
        ("loose xi1", f(&loose, "xi1"), 539.0, 0.02),
        ("loose xi2", f(&loose, "xi2"), 1.24, 0.10),
        ("a=8.5 xi2", f(&free, "xi2"), -0.52, 0.10),
    ];
    let ok = checks.iter().all(|c| within(c.1, c.2, c.3));
    let detail = checks
        .iter()
        .map(|c| format!("{} = {:.4} (target {}, ±{}%) {}", c.0, c.1, c.2, c.3 * 100.0, mark(within(c.1, c.2, c.3))))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((ok, detail))
}

fn c2_pair_hops() -> Outcome {
    let q = |delta: f64| -> Result<f64, String> {
        let g = ChainGeometry::default_chain(6, 7.0).map_err(e)?;
        Ok(anisotropies(&g, &DriveParams::from_mhz(2.54, delta).map_err(e)?).map_err(e)?.q_nnn.abs())
    };
    let (qp, qm) = (q(12.0)?, q(-3.3)?);
    let (a, b) = (within(qp, 0.13, 0.05), within(qm, 0.01, 0.20));
    Ok((a && b, format!("|Q|(+12) = {qp:.4} (0.13 ±5%) {}; |Q|(−3.3) = {qm:.5} (0.01 ±20%) {}", mark(a), mark(b))))
}

fn c3_two_atom() -> Outcome {
    let (om, de) = (mhz_to_angular(1.52), mhz_to_angular(5.0));
    let v = c6() / 4.95f64.powi(6);
    let j = coeff_j(om, de, v).map_err(e)?;
    let j_mhz = angular_to_mhz(j).abs();
    let closed = (j_mhz - 0.128).abs() <= 0.008;

    let mut spec = preset("two-atom-exchange").map_err(e)?;
    spec.times = (0..=4000).map(|k| k as f64 * 0.002).collect();
    let r = run_experiment(&spec, &settings(0, 1)).map_err(e)?;
    let signal = r
        .populations
        .iter()
        .map(|p| p.postselect(1).map(|(q, _)| q.probability(0b01)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let freq = oscillation_frequency(&r.times, &signal).map_err(e)?;
    let two_j = 2.0 * j.abs() / TAU;
    let ratio = freq / two_j;
    let dynamic = (ratio - 1.0).abs() < 0.03;
    Ok((
        closed && dynamic,
        format!(
            "J/2π = {j_mhz:.4} MHz (0.128 ± 0.008) {}; exact postselected frequency {freq:.4} MHz vs 2J/2π = {two_j:.4} MHz, ratio {ratio:.4} (within 3%) {}{}",
            mark(closed),
            mark(dynamic),
            if dynamic {
                ""
            } else {
                "; the exact frequency is the dressed single-excitation level splitting, which differs from 2J by fourth-order light shifts at |Δ/Ω| = 3.3"
            }
        ),
    ))
}

fn c4_potential() -> Outcome {
    let om = mhz_to_angular(1.52);
    let mut worst = 0.0f64;
    let mut n = 0;
    for delta_mhz in [5.0, -5.0] {
        let de = mhz_to_angular(delta_mhz);
        for k in 0..=1100 {
            let r = 4.4 + 0.005 * k as f64;
            if let (Ok(a), Ok(b)) = (dressing_potential(r, om, de, c6()), coeff_j(om, de, c6() / r.powi(6))) {
                worst = worst.max(((a - b) / b).abs());
                n += 1;
            }
        }
    }
    let rc = dressing_radius(mhz_to_angular(5.0), c6()).map_err(e)?;
    let identity = worst <= 1e-12;
    let located = (rc - 7.68).abs() <= 0.01;
    // measured pair distances carry a ±0.3 μm error
    let bracketed = rc > 7.7 - 0.3 && rc < 7.98 + 0.3;
    Ok((
        identity && located && bracketed,
        format!(
            "max relative |J(r) − coeff_j| = {worst:.2e} over {n} points {}; r_c = {rc:.4} μm {}; peak rows 7.7–7.98 μm with ±0.3 μm distance error {}",
            mark(identity),
            mark(located),
            mark(bracketed)
        ),
    ))
}

fn c5_oracle() -> Outcome {
    let exact = EffectiveOptions::default().with_onsite(Onsite::Exact);
    let mut rng = stream(5, Component::Synthetic, 0);
    let (mut worst, mut cases, mut skipped) = (0.0f64, 0, 0);
    for n in 2..=6 {
        for ratio in [2.0, 3.0, 4.0] {
            for sign in [1.0, -1.0] {
                for _ in 0..6 {
                    let a: f64 = rng.random_range(4.0..10.0);
                    let omega: f64 = rng.random_range(0.5..3.0);
                    let g = ChainGeometry::default_chain(n, a).map_err(e)?;
                    let d = DriveParams::from_mhz(omega, sign * ratio * omega).map_err(e)?;
                    let pair = (|| -> rydmag::Result<f64> {
                        let (h1, _) = build_effective_single_magnon_with(&g, &d, &exact)?;
                        let (o1, _) = sw_oracle(&g, &d, 1)?;
                        let (h2, _) = build_effective_two_magnon_with(&g, &d, &exact)?;
                        let (o2, _) = sw_oracle(&g, &d, 2)?;
                        Ok(relative_deviation(&h1, &o1).max(relative_deviation(&h2, &o2)))
                    })();
                    match pair {
                        Ok(dev) => {
                            worst = worst.max(dev);
                            cases += 1;
                        }
                        Err(rydmag::Error::Resonance { .. }) => skipped += 1,
                        Err(x) => return Err(e(x)),
                    }
                }
            }
        }
    }
    Ok((
        worst <= 1e-10 && cases > 0,
        format!("{cases} random chains (N 2–6, |Δ/Ω| 2, 3, 4, N_R 1 and 2), worst relative deviation {worst:.2e}, {skipped} resonant draws skipped"),
    ))
}

fn c6_spectrum() -> Outcome {
    let bands = chain_bands(1.0, -3.0, bound_state_theory_spacing())?;
    let states = classify_bound_states(&bands).map_err(e)?;
    let two_per_k = bands.slices.iter().all(|s| {
        let here: Vec<_> = states.iter().filter(|b| b.k == s.k).collect();
        here.len() == 2 && here.iter().filter(|b| b.branch == Branch::Tight).count() == 1
    });
    let max_bond = states
        .iter()
        .filter(|s| s.branch == Branch::Tight)
        .map(|s| s.bond_length)
        .fold(0.0, f64::max);
    let wt = branch_bandwidth(&states, Branch::Tight).unwrap_or(f64::NAN);
    let wl = branch_bandwidth(&states, Branch::Loose).unwrap_or(f64::NAN);
    let wide = bands.recompute(2 * DEFAULT_R_MAX).map_err(e)?;
    let shift = states
        .iter()
        .map(|s| {
            let slice = wide.slices.iter().find(|w| w.k == s.k).expect("same grid");
            slice.energies.iter().map(|x| (x - s.energy).abs()).fold(f64::INFINITY, f64::min) / s.energy.abs()
        })
        .fold(0.0, f64::max);
    let ok = two_per_k && max_bond < 1.05 && wt < 0.1 * wl && shift < 1e-6;
    Ok((
        ok,
        format!(
            "two bound branches at all {} momenta {}; max tight bond length {max_bond:.4} {}; bandwidths tight {wt:.4} vs loose {wl:.4} rad/μs {}; max relative shift on doubling r_max {shift:.2e} {}",
            bands.slices.len(),
            mark(two_per_k),
            mark(max_bond < 1.05),
            mark(wt < 0.1 * wl),
            mark(shift < 1e-6)
        ),
    ))
}

fn c7_overlaps() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, target) in [(4.95, 0.24), (8.5, 0.09)] {
        let bands = chain_bands(2.06, -3.0, a)?;
        let inf = initial_overlap(2, &bands, OverlapMethod::InfiniteChain).map_err(e)?;
        let sw = initial_overlap(2, &bands, OverlapMethod::StandingWave { chain_length: 7 }).map_err(e)?;
        let hit = (inf.loose - target).abs() <= 0.03;
        ok &= hit;
        parts.push(format!(
            "a = {a} μm: loose overlap {:.4} (target {target} ± 0.03) {}, open-chain standing waves {:.4}",
            inf.loose,
            mark(hit),
            sw.loose
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c8_frozen() -> Outcome {
    let spec = preset("tight-pair-frozen").map_err(e)?;
    let j = EffectiveCoefficients::new(&spec.geometry, &spec.drive).map_err(e)?.j(0, 1).abs();
    let times: Vec<f64> = (0..=56).map(|k| 2.8 * PI / j * k as f64 / 56.0).collect();

    let (h, basis) =
        build_effective_sector(&spec.geometry, &spec.drive, 2, &EffectiveOptions::nearest_neighbour()).map_err(e)?;
    let psi0 = start_in(&basis, &[2, 3]);
    let run = evolve_unitary(&h, &psi0, &times).map_err(e)?;
    let min_fid = run.states.iter().map(|psi| psi0.dotc(psi).norm_sqr()).fold(1.0, f64::min);
    let frozen = min_fid > 1.0 - 1e-9;

    let mut exact = spec.clone();
    exact.times = times;
    let r = run_experiment(&exact, &settings(0, 1)).map_err(e)?;
    let mut min_br1 = f64::INFINITY;
    for p in &r.populations {
        let (kept, _) = p.postselect(2).map_err(e)?;
        min_br1 = min_br1.min(participation_ratios(&correlator(&kept).map_err(e)?).map_err(e)?.0);
    }
    let bound = min_br1 > 0.9;

    let noisy = |name: &str, cap: Option<usize>, samples: usize| -> Result<Vec<(f64, f64)>, String> {
        let mut spec = noisy_preset(name).map_err(e)?;
        let j = EffectiveCoefficients::new(&spec.geometry, &spec.drive).map_err(e)?.j(0, 1).abs();
        spec.times = (1..=4).map(|k| k as f64 / (4.0 * j)).collect();
        spec.max_excitations = cap;
        let r = run_experiment(&spec, &RunSettings { disorder_samples: samples, shots: 10_000, seed: 23 }).map_err(e)?;
        let post = postselect(r.shots.as_ref().expect("shots requested"), 2);
        post.shots
            .records
            .iter()
            .map(|rec| {
                let p = Populations::from_shots(spec.geometry.len(), &rec.shots).map_err(e)?;
                participation_ratios(&correlator(&p).map_err(e)?).map_err(e)
            })
            .collect()
    };
    let (b6, _) = uniform_baselines(6);
    let (_, b7) = uniform_baselines(7);
    let tight: f64 = noisy("tight-pair-transport", None, 4)?
        .into_iter()
        .chain(noisy("tight-pair-frozen", None, 4)?)
        .map(|x| x.0)
        .fold(f64::INFINITY, f64::min);
    let loose = noisy("loose-pair-transport", Some(4), 2)?
        .into_iter()
        .map(|x| x.1)
        .fold(f64::INFINITY, f64::min);
    let above = tight > b6 && loose > b7;
    Ok((
        frozen && bound && above,
        format!(
            "NN-truncated min fidelity {min_fid:.12} {}; full couplings min BR₁ {min_br1:.4} {}; noisy min BR₁ {tight:.4} vs uniform {b6:.4} (N = 6), noisy loose-pair min BR₂ {loose:.4} vs uniform {b7:.4} (N = 7) {}",
            mark(frozen),
            mark(bound),
            mark(above)
        ),
    ))
}

fn c9_hrs() -> Outcome {
    let gamma = mhz_to_angular(0.2);
    let j = coeff_j(mhz_to_angular(2.54), mhz_to_angular(-5.0), c6() / 4.95f64.powi(6)).map_err(e)?;
    let msd = |t: f64| hrs_msd(101, j, gamma, &[t]).map(|v| v[0]);
    let early = local_exponent(msd, 0.05 / gamma, 0.01).map_err(e)?;
    let late = local_exponent(msd, 20.0 / gamma, 0.01).map_err(e)?;
    let (a, b) = ((early - 2.0).abs() <= 0.1, (late - 1.0).abs() <= 0.15);
    Ok((a && b, format!("slope {early:.4} at 0.05/γ (2.0 ± 0.1) {}; {late:.4} at 20/γ (1.0 ± 0.15) {}", mark(a), mark(b))))
}

fn c10_open_system() -> Outcome {
    let mut spec = preset("tight-pair-transport").map_err(e)?;
    spec.noise = NoiseModel::experimental();
    spec.init_error = 0.05;
    spec.times = (0..=8).map(|k| k as f64 * 0.1).collect();
    let r = run_experiment(&spec, &RunSettings { disorder_samples: 2, shots: 0, seed: 3 }).map_err(e)?;
    let trace = r.max_trace_drift < 1e-7;
    let positive = r.min_eigenvalue > -1e-7;

    let g = ChainGeometry::default_chain(5, 5.0).map_err(e)?;
    let drive = DriveParams::from_mhz(2.0, -6.0).map_err(e)?;
    let (h, basis) = build_effective_single_magnon_with(&g, &drive, &single_magnon_default()).map_err(e)?;
    let mut psi0 = DVector::zeros(5);
    psi0[2] = C64::new(1.0, 0.0);
    let times = [0.3, 0.9];
    let closed = evolve_unitary(&h, &psi0, &times).map_err(e)?;
    let diff = |noise: &NoiseModel| -> Result<f64, String> {
        let open = evolve_lindblad(&h, &basis, &pure_density(&psi0), noise, &times, &LindbladOptions::default())
            .map_err(e)?;
        Ok(open
            .states
            .iter()
            .zip(&closed.states)
            .map(|(rho, psi)| (rho - pure_density(psi)).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max))
    };
    let limit = diff(&NoiseModel::none())?;
    let collective = diff(&NoiseModel { gamma_col: mhz_to_angular(0.4), ..NoiseModel::none() })?;
    Ok((
        trace && positive && limit < 1e-8 && collective < 1e-9,
        format!(
            "trace drift {:.2e} {}; min eigenvalue {:.2e} {}; closed limit vs unitary {limit:.2e} {}; collective dephasing on fixed-N_R coherences {collective:.2e} {}",
            r.max_trace_drift,
            mark(trace),
            r.min_eigenvalue,
            mark(positive),
            mark(limit < 1e-8),
            mark(collective < 1e-9)
        ),
    ))
}

fn c11_measurement() -> Outcome {
    let det = DetectionModel::experimental();
    let truth = [0.05, 0.2, 0.1, 0.15, 0.08, 0.12, 0.18, 0.12];
    let pop = Populations::from_dense(3, &truth).map_err(e)?;
    let shots = sample_shots(&pop, &det, 100_000, 7, 0, 0.0).map_err(e)?;
    let est = mle_spam_correct(3, &shots.records[0].shots, &det, &MleOptions::default()).map_err(e)?;
    let tv = 0.5 * truth.iter().zip(&est.populations).map(|(a, b)| (a - b).abs()).sum::<f64>();

    let det1 = DetectionModel::new(0.2, 0.03).map_err(e)?;
    let ones: Vec<u32> = (0..1000).map(|k| (k < 300) as u32).collect();
    let expect = (0.3 - det1.p_r_given_g) / (1.0 - det1.p_r_given_g - det1.p_g_given_r);
    let single = mle_spam_correct(1, &ones, &det1, &MleOptions::default()).map_err(e)?.populations[1];
    let identity = (single - expect).abs() < 1e-9;

    let mut spec = preset("two-atom-exchange").map_err(e)?;
    spec.detection = DetectionModel::experimental();
    spec.times = (0..=20).map(|k| k as f64 * 0.4).collect();
    let r = run_experiment(&spec, &settings(2000, 5)).map_err(e)?;
    let post = postselect(r.shots.as_ref().expect("shots requested"), 1);
    let min_ret = post.retention.iter().copied().fold(1.0, f64::min);
    let kept = post.overall_retention > 0.6;
    Ok((
        tv < 0.01 && identity && kept,
        format!(
            "TV distance {tv:.4} at 1e5 shots {}; single-site |MLE − inversion| = {:.1e} {}; two-atom retention {:.4} overall, {min_ret:.4} worst time {}",
            mark(tv < 0.01),
            (single - expect).abs(),
            mark(identity),
            post.overall_retention,
            mark(kept)
        ),
    ))
}

fn collect_files(dir: &Path, rel: &str, acc: &mut Vec<(String, Vec<u8>)>) -> Result<(), String> {
    for entry in std::fs::read_dir(dir.join(rel)).map_err(e)? {
        let entry = entry.map_err(e)?;
        let name = format!("{rel}{}", entry.file_name().to_string_lossy());
        if entry.file_type().map_err(e)?.is_dir() {
            collect_files(dir, &format!("{name}/"), acc)?;
        } else if name.ends_with(".csv") || name.starts_with("shots/") {
            acc.push((name.clone(), std::fs::read(dir.join(&name)).map_err(e)?));
        }
    }
    acc.sort();
    Ok(())
}

fn c12_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(e)?;
    let mut compared = 0;
    let mut differing = Vec::new();
    for (cmd, name) in [("walk", "quantum-walk"), ("pair", "loose-pair-transport")] {
        let args = [cmd, "--preset", name, "--shots", "500", "--disorder-samples", "2", "--seed", "99"];
        let (a, b) = (tmp.path().join(format!("{cmd}-a")), tmp.path().join(format!("{cmd}-b")));
        rydmag_cli(&args, &a)?;
        rydmag_cli(&args, &b)?;
        let (mut fa, mut fb) = (Vec::new(), Vec::new());
        collect_files(&a, "", &mut fa)?;
        collect_files(&b, "", &mut fb)?;
        if fa.len() != fb.len() {
            differing.push(format!("{cmd}: file sets differ"));
        }
        for (x, y) in fa.iter().zip(&fb) {
            compared += 1;
            if x != y {
                differing.push(x.0.clone());
            }
        }
    }
    Ok((
        differing.is_empty() && compared > 0,
        format!("{compared} CSV and shot files compared across repeated runs, {} differ {:?}", differing.len(), differing),
    ))
}

fn s1_leakage() -> Outcome {
    let base = preset("two-atom-exchange").map_err(e)?;
    let j = coeff_j(base.drive.omega, base.drive.delta, base.geometry.interaction(0, 1)).map_err(e)?;
    let mut worst = 0.0f64;
    for sign in [1.0, -1.0] {
        let mut spec = base.clone();
        spec.drive = DriveParams::new(spec.drive.omega, sign * 3.0 * spec.drive.omega).map_err(e)?;
        spec.times = (0..=400).map(|k| k as f64 * PI / j.abs() / 400.0).collect();
        let r = run_experiment(&spec, &settings(0, 1)).map_err(e)?;
        worst = r.leakage.iter().copied().fold(worst, f64::max);
    }
    Ok((worst < 0.15, format!("two atoms, |Δ/Ω| = 3, t ≤ π/J: peak weight outside N_R = 1 is {worst:.4} (< 0.15)")))
}

fn s2_chain_leakage() -> Outcome {
    let mut spec = preset("quantum-walk").map_err(e)?;
    spec.drive = DriveParams::new(spec.drive.omega, -3.0 * spec.drive.omega).map_err(e)?;
    let j = EffectiveCoefficients::new(&spec.geometry, &spec.drive).map_err(e)?.j(2, 3).abs();
    spec.times = (0..=100).map(|k| k as f64 * PI / j / 100.0).collect();
    let r = run_experiment(&spec, &settings(0, 1)).map_err(e)?;
    let worst = r.leakage.iter().copied().fold(0.0, f64::max);
    Ok((
        worst < 0.15,
        format!(
            "seven atoms at 4.95 μm, |Δ/Ω| = 3, bare quench from one excitation: peak weight outside N_R = 1 is {worst:.4}; the undressed initial state projects onto pair-excited dressed states whose weight grows with the number of neighbours"
        ),
    ))
}

fn s3_effective_vs_exact() -> Outcome {
    let g = ChainGeometry::default_chain(4, 6.0).map_err(e)?;
    let mut ov = Vec::new();
    for ratio in [4.0, 8.0, 12.0] {
        let drive = DriveParams::from_mhz(1.0, -ratio).map_err(e)?;
        let j = EffectiveCoefficients::new(&g, &drive).map_err(e)?.j(0, 1);
        let cmp = compare_with_exact(&g, &drive, mask_from_sites(&[1]), &[PI / j.abs()]).map_err(e)?;
        ov.push(cmp.overlaps[0]);
    }
    Ok((
        ov[0] >= 0.99,
        format!(
            "four atoms, t = π/|J|: sector-projected overlap {:.4} at |Δ/Ω| = 4 (target ≥ 0.99), {:.4} at 8, {:.5} at 12; the infidelity falls as (Ω/Δ)⁴, the size of the neglected fourth-order couplings",
            ov[0], ov[1], ov[2]
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 15] = [
        ("C1", "coefficient reproduction", c1_coefficients),
        ("C2", "pair-hop strengths", c2_pair_hops),
        ("C3", "two-atom exchange", c3_two_atom),
        ("C4", "potential curve", c4_potential),
        ("C5", "effective model equals brute-force Schrieffer-Wolff", c5_oracle),
        ("C6", "spectrum topology", c6_spectrum),
        ("C7", "bound-state overlaps", c7_overlaps),
        ("C8", "frozen dynamics and fragmentation", c8_frozen),
        ("C9", "ballistic to diffusive crossover", c9_hrs),
        ("C10", "open-system sanity", c10_open_system),
        ("C11", "measurement pipeline", c11_measurement),
        ("C12", "determinism", c12_determinism),
        ("S1", "two-atom U(1) leakage", s1_leakage),
        ("S2", "chain U(1) leakage (informational)", s2_chain_leakage),
        ("S3", "effective vs exact evolution at |Δ/Ω| = 4 (informational)", s3_effective_vs_exact),
    ];
    let mut passed = 0;
    for (id, name, f) in criteria {
        let (ok, detail) = f().unwrap_or_else(|err| (false, format!("error: {err}")));
        passed += ok as usize;
        println!("{} {id} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {passed}/{} PASS", criteria.len());
}
