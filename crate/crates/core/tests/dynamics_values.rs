use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rydmag::dynamics::*;
use rydmag::effective::*;
use rydmag::linalg::{eigh, C64};
use rydmag::model::*;
use rydmag::observables::*;
use rydmag::presets::preset;
use rydmag::units::mhz_to_angular;

fn basis_vector(dim: usize, k: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

fn settings() -> RunSettings {
    RunSettings {
        disorder_samples: 1,
        shots: 0,
        seed: 11,
    }
}

#[test]
fn two_atom_exchange_follows_dressed_level_splitting() {
    let mut spec = preset("two-atom-exchange").unwrap();
    spec.times = (0..=4000).map(|k| k as f64 * 0.002).collect();
    let r = run_experiment(&spec, &settings()).unwrap();
    let signal: Vec<f64> = r
        .populations
        .iter()
        .map(|p| p.postselect(1).unwrap().0.probability(0b01))
        .collect();
    let f = oscillation_frequency(&r.times, &signal).unwrap();

    // The antisymmetric single-excitation state decouples at energy −Δ; the
    // symmetric one mixes with |gg⟩ and |rr⟩ in a 3×3 block.
    let (om, de) = (spec.drive.omega, spec.drive.delta);
    let v = spec.geometry.interaction(0, 1);
    let c = om / 2f64.sqrt();
    let block = DMatrix::from_row_slice(3, 3, &[0.0, c, 0.0, c, -de, c, 0.0, c, -2.0 * de + v]);
    let e = eigh(block);
    let k = (0..3).max_by(|&a, &b| e.vectors[(1, a)].abs().total_cmp(&e.vectors[(1, b)].abs())).unwrap();
    let oracle = (e.values[k] + de).abs() / TAU;
    assert!((f / oracle - 1.0).abs() < 5e-3, "measured {f}, level splitting {oracle}");

    // Closed-form 2J is the leading order of that splitting.
    let two_j = 2.0 * coeff_j(om, de, v).unwrap().abs() / TAU;
    assert!((f / two_j - 1.0).abs() < 0.06, "{f} vs 2J {two_j}");
}

#[test]
fn two_atom_leakage_stays_below_fifteen_percent() {
    let mut spec = preset("two-atom-exchange").unwrap();
    let j = coeff_j(spec.drive.omega, spec.drive.delta, spec.geometry.interaction(0, 1)).unwrap();
    for sign in [1.0, -1.0] {
        spec.drive = DriveParams::new(spec.drive.omega, sign * 3.0 * spec.drive.omega).unwrap();
        spec.times = (0..=400).map(|k| k as f64 * PI / j.abs() / 400.0).collect();
        let r = run_experiment(&spec, &settings()).unwrap();
        let worst = r.leakage.iter().fold(0.0f64, |m, &l| m.max(l));
        assert!(worst < 0.15, "sign {sign}: leakage {worst}");
    }
}

/// Exact Hamiltonian restricted to the dressed single-excitation manifold,
/// written in the dressed-site basis obtained by polar decomposition of the
/// manifold's bare single-excitation amplitudes.
fn dressed_frame_hamiltonian(g: &ChainGeometry, drive: &DriveParams) -> DMatrix<f64> {
    let n = g.len();
    let e = eigh(build_ising_hamiltonian(g, drive).unwrap().to_dense());
    let weight = |k: usize| (0..n).map(|i| e.vectors[(1 << i, k)].powi(2)).sum::<f64>();
    let mut order: Vec<usize> = (0..1 << n).collect();
    order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)));
    let manifold = &order[..n];
    let m = DMatrix::from_fn(n, n, |i, k| e.vectors[(1 << i, manifold[k])]);
    let svd = m.svd(true, true);
    let w = svd.u.unwrap() * svd.v_t.unwrap();
    let energies = DMatrix::from_diagonal(&DVector::from_iterator(n, manifold.iter().map(|&k| e.values[k])));
    let h = &w * energies * w.transpose();
    (&h + h.transpose()) * 0.5
}

#[test]
fn effective_couplings_match_dressed_frame_to_fourth_order() {
    let g = ChainGeometry::default_chain(4, 6.0).unwrap();
    let mut errs = Vec::new();
    for ratio in [4.0, 8.0] {
        let drive = DriveParams::from_mhz(1.0, -ratio).unwrap();
        let c = EffectiveCoefficients::new(&g, &drive).unwrap();
        let hd = dressed_frame_hamiltonian(&g, &drive);
        errs.push(((hd[(1, 2)] - c.j(1, 2)) / c.j(1, 2)).abs());
    }
    // relative error of J is O((Ω/Δ)²): halving Ω/Δ cuts it about fourfold
    assert!(errs[0] < 0.06, "{errs:?}");
    assert!(errs[0] / errs[1] > 3.0 && errs[0] / errs[1] < 5.0, "{errs:?}");
}

#[test]
fn effective_evolution_converges_to_exact_sector() {
    let g = ChainGeometry::default_chain(4, 6.0).unwrap();
    let mut infidelity = Vec::new();
    for ratio in [4.0, 8.0, 12.0] {
        let drive = DriveParams::from_mhz(1.0, -ratio).unwrap();
        let j = EffectiveCoefficients::new(&g, &drive).unwrap().j(0, 1);
        let cmp = compare_with_exact(&g, &drive, mask_from_sites(&[1]), &[PI / j.abs()]).unwrap();
        infidelity.push(1.0 - cmp.overlaps[0]);
    }
    // second-order dynamics: the infidelity at t = π/J falls roughly as (Ω/Δ)⁴
    assert!(infidelity[1] < 0.01, "{infidelity:?}");
    assert!(infidelity[2] < 0.002, "{infidelity:?}");
    assert!(infidelity[0] / infidelity[1] > 8.0, "{infidelity:?}");
}

#[test]
fn lindblad_run_keeps_trace_and_positivity() {
    let mut spec = preset("tight-pair-transport").unwrap();
    spec.noise = NoiseModel::experimental();
    spec.init_error = 0.05;
    spec.times = (0..=8).map(|k| k as f64 * 0.1).collect();
    let r = run_experiment(&spec, &RunSettings { disorder_samples: 2, shots: 0, seed: 3 }).unwrap();
    assert!(r.max_trace_drift < 1e-7, "{}", r.max_trace_drift);
    assert!(r.min_eigenvalue > -1e-7, "{}", r.min_eigenvalue);

    let mut rk = spec.clone();
    rk.integrator = Integrator::rk4();
    rk.times = vec![0.2];
    spec.times = vec![0.2];
    let a = run_experiment(&spec, &settings()).unwrap();
    let b = run_experiment(&rk, &settings()).unwrap();
    let (pa, pb) = (a.populations[0].to_dense(), b.populations[0].to_dense());
    let diff = pa.iter().zip(&pb).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff < 1e-8, "Taylor vs RK4 {diff}");
}

#[test]
fn collective_dephasing_leaves_single_magnon_walk_untouched() {
    let g = ChainGeometry::default_chain(5, 5.0).unwrap();
    let drive = DriveParams::from_mhz(2.0, -6.0).unwrap();
    let (h, basis) = build_effective_single_magnon_with(&g, &drive, &single_magnon_default()).unwrap();
    let rho0 = pure_density(&basis_vector(5, 2));
    let noise = NoiseModel {
        gamma_col: mhz_to_angular(0.4),
        ..NoiseModel::none()
    };
    let times = [0.3, 0.9];
    let open = evolve_lindblad(&h, &basis, &rho0, &noise, &times, &LindbladOptions::default()).unwrap();
    let closed = evolve_unitary(&h, &basis_vector(5, 2), &times).unwrap();
    for (rho, psi) in open.states.iter().zip(&closed.states) {
        let d = rho - pure_density(psi);
        assert!(d.iter().all(|z| z.norm() < 1e-9));
    }
}

#[test]
fn hrs_crosses_over_from_ballistic_to_diffusive() {
    let gamma = mhz_to_angular(0.2);
    let g = ChainGeometry::default_chain(2, 4.95).unwrap();
    let j = coeff_j(mhz_to_angular(2.54), mhz_to_angular(-5.0), g.interaction(0, 1)).unwrap();
    let msd = |t: f64| hrs_msd(101, j, gamma, &[t]).map(|v| v[0]);
    let early = local_exponent(msd, 0.05 / gamma, 0.01).unwrap();
    let late = local_exponent(msd, 20.0 / gamma, 0.01).unwrap();
    assert!((early - 2.0).abs() < 0.1, "early exponent {early}");
    assert!((late - 1.0).abs() < 0.15, "late exponent {late}");

    // γ = 0: least-squares log-log slope on (0, 0.2/J].
    let times: Vec<f64> = (1..=20).map(|k| k as f64 * 0.01 / j.abs()).collect();
    let m = hrs_msd(101, j, 0.0, &times).unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = times.iter().zip(&m).map(|(t, x)| (t.ln(), x.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / 20.0, ys.iter().sum::<f64>() / 20.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() < 0.05, "ballistic slope {slope}");
}

#[test]
fn disorder_statistics() {
    let noise = NoiseModel::experimental();
    let n = 10_000;
    let mut sums = [0.0; 3];
    let mut fourth = [0.0; 3];
    for k in 0..n {
        let d = displacement_sample(1, &noise, 42, k)[0];
        for ax in 0..3 {
            sums[ax] += d[ax] * d[ax];
            fourth[ax] += d[ax].powi(4);
        }
    }
    let sigmas = [noise.sigma_radial, noise.sigma_radial, noise.sigma_axial];
    for ax in 0..3 {
        let var = sums[ax] / n as f64;
        // standard error of the variance estimate from the sample fourth moment
        let se = ((fourth[ax] / n as f64 - var * var) / n as f64).sqrt();
        assert!((var - sigmas[ax].powi(2)).abs() < 3.0 * se, "axis {ax}: {var} vs {}", sigmas[ax].powi(2));
    }

    let a = 4.95;
    let base = ChainGeometry::default_chain(2, a).unwrap();
    let v0 = base.interaction(0, 1);
    let samples = disorder_ensemble(&base, &noise, 20_000, 7).unwrap();
    let rel: Vec<f64> = samples.iter().map(|g| g.interaction(0, 1) / v0 - 1.0).collect();
    let mean = rel.iter().sum::<f64>() / rel.len() as f64;
    let sd = (rel.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rel.len() as f64).sqrt();
    let predicted = nn_coupling_spread(a, noise.sigma_radial, &[noise.sigma_radial, noise.sigma_axial]);
    assert!((sd / predicted - 1.0).abs() < 0.15, "sampled {sd}, first order {predicted}");
}

#[test]
fn quantum_walk_shows_interference() {
    let spec = preset("quantum-walk").unwrap();
    let r = run_experiment(&spec, &settings()).unwrap();
    let k = r.times.iter().position(|&t| (t - 1.0).abs() < 1e-9).unwrap();
    let d = rydberg_density(&r.populations[k].postselect(1).unwrap().0).unwrap();
    let centre = 3;
    let profile: Vec<f64> = (0..=3).map(|s| d[centre + s]).collect();
    let monotone = profile.windows(2).all(|w| w[1] <= w[0]);
    assert!(!monotone, "profile {profile:?} should be staggered");
    assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn excitation_cap_is_exact_once_blockade_saturates() {
    let mut spec = preset("quantum-walk").unwrap();
    let full = run_experiment(&spec, &settings()).unwrap();
    // Seven sites at 4.95 μm never hold more than four well-separated excitations.
    spec.max_excitations = Some(4);
    let capped = run_experiment(&spec, &settings()).unwrap();
    for (a, b) in full.populations.iter().zip(&capped.populations) {
        let (x, y) = (rydberg_density(a).unwrap(), rydberg_density(b).unwrap());
        assert!(x.iter().zip(&y).all(|(u, v)| (u - v).abs() < 1e-3), "{x:?} vs {y:?}");
    }
}

#[test]
fn shot_records_are_reproducible() {
    let mut spec = preset("tight-pair-transport").unwrap();
    spec.noise = NoiseModel {
        sigma_radial: 0.1,
        sigma_axial: 0.3,
        ..NoiseModel::none()
    };
    spec.detection = rydmag::measurement::DetectionModel::experimental();
    spec.times = vec![0.0, 0.5, 1.0];
    let s = RunSettings {
        disorder_samples: 3,
        shots: 500,
        seed: 2024,
    };
    let a = run_experiment(&spec, &s).unwrap().shots.unwrap();
    let b = run_experiment(&spec, &s).unwrap().shots.unwrap();
    assert_eq!(a, b);
    let c = run_experiment(&spec, &RunSettings { seed: 2025, ..s }).unwrap().shots.unwrap();
    assert_ne!(a, c);
    assert!(run_experiment(&spec, &RunSettings { shots: 0, ..s }).unwrap().shots.is_none());
}
