use rydmag::effective::{anisotropies, coeff_j, dressing_potential, dressing_radius, AnisotropyReport};
use rydmag::model::{ChainGeometry, DriveParams};
use rydmag::units::{angular_to_mhz, mhz_to_angular, DEFAULT_C6_MHZ_UM6};

fn report(n: usize, a: f64, omega: f64, delta: f64) -> AnisotropyReport {
    let g = ChainGeometry::default_chain(n, a).unwrap();
    anisotropies(&g, &DriveParams::from_mhz(omega, delta).unwrap()).unwrap()
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    ((x - target) / target).abs() <= rel
}

#[test]
fn theory_point_anisotropies() {
    // Δ/Ω = −3 and V₁/Δ = −8
    let a = (DEFAULT_C6_MHZ_UM6 / 24.0f64).powf(1.0 / 6.0);
    let r = report(7, a, 1.0, -3.0);
    assert!(within(r.xi1, 684.0, 0.02), "{}", r.xi1);
    assert!(within(r.xi2, 4.0, 0.25), "{}", r.xi2);
    assert!(within(r.xi2_two_body, 4.0, 0.25), "{}", r.xi2_two_body);
    assert!((r.xi1 - 683.56).abs() < 0.05);
    assert!((r.xi2 - 3.857).abs() < 0.005);
}

#[test]
fn tight_pair_anisotropy_and_hops() {
    let r = report(6, 7.0, 2.54, 12.0);
    assert!(within(r.xi1, -35.0, 0.05), "{}", r.xi1);
    assert!(within(r.q_nnn.abs(), 0.13, 0.05), "{}", r.q_nnn);
    let frozen = report(6, 7.0, 2.54, -3.3);
    assert!(within(frozen.q_nnn.abs(), 0.01, 0.20), "{}", frozen.q_nnn);
    // NN exchange stays comparable between the two detunings
    assert!(within(frozen.j_nn.abs(), r.j_nn.abs(), 0.15));
}

#[test]
fn loose_pair_anisotropies() {
    let r = report(7, 4.95, 2.06, -3.0);
    assert!(within(r.xi1, 539.0, 0.02), "{}", r.xi1);
    assert!(within(r.xi2, 1.24, 0.10), "{}", r.xi2);
    // the two-body part alone misses the lattice sum
    assert!(!within(r.xi2_two_body, 1.24, 0.10));
    let free = report(7, 8.5, 2.06, -3.0);
    assert!(within(free.xi2, -0.52, 0.10), "{}", free.xi2);
}

#[test]
fn two_atom_exchange_within_measured_value() {
    let c6 = mhz_to_angular(DEFAULT_C6_MHZ_UM6);
    let j = coeff_j(mhz_to_angular(1.52), mhz_to_angular(5.0), c6 / 4.95f64.powi(6)).unwrap();
    let j = angular_to_mhz(j).abs();
    assert!((j - 0.128).abs() <= 0.008, "{j}");
}

#[test]
fn potential_curve_divergence() {
    let c6 = mhz_to_angular(DEFAULT_C6_MHZ_UM6);
    let (o, d) = (mhz_to_angular(1.52), mhz_to_angular(5.0));
    let rc = dressing_radius(d, c6).unwrap();
    assert!((rc - 7.68).abs() < 0.01 && rc < 7.7, "{rc}");
    let near = dressing_potential(rc * 1.001, o, d, c6).unwrap();
    let far = dressing_potential(rc * 1.1, o, d, c6).unwrap();
    assert!(near.abs() > 10.0 * far.abs());
}
