use rand_distr::{Distribution, Normal};

use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::model::ChainGeometry;
use crate::rng::{stream, Component};

/// Gaussian displacements for one ensemble member: σ_radial on x and y,
/// σ_axial on z (the tweezer axis). Depends only on (seed, index).
pub fn displacement_sample(n_atoms: usize, noise: &NoiseModel, seed: u64, index: u64) -> Vec<[f64; 3]> {
    let mut rng = stream(seed, Component::Disorder, index);
    let draw = |s: f64, rng: &mut rand_chacha::ChaCha8Rng| {
        if s > 0.0 {
            Normal::new(0.0, s).expect("finite sigma").sample(rng)
        } else {
            0.0
        }
    };
    (0..n_atoms)
        .map(|_| {
            let x = draw(noise.sigma_radial, &mut rng);
            let y = draw(noise.sigma_radial, &mut rng);
            let z = draw(noise.sigma_axial, &mut rng);
            [x, y, z]
        })
        .collect()
}

pub fn disorder_sample(base: &ChainGeometry, noise: &NoiseModel, seed: u64, index: u64) -> Result<ChainGeometry> {
    if !noise.has_disorder() {
        return Ok(base.clone());
    }
    base.displaced(&displacement_sample(base.len(), noise, seed, index))
}

pub fn disorder_ensemble(
    base: &ChainGeometry,
    noise: &NoiseModel,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ChainGeometry>> {
    if n_samples == 0 {
        return Err(Error::Validation("disorder ensemble needs at least one sample".into()));
    }
    noise.validate()?;
    (0..n_samples as u64)
        .map(|k| disorder_sample(base, noise, seed, k))
        .collect()
}

/// First-order relative spread of a nearest-neighbour 1/r⁶ coupling when
/// both atoms move independently: 6√2σ_∥/a from motion along the bond plus
/// the leading quadratic term 6√2σ_⊥²/a² from each transverse axis.
pub fn nn_coupling_spread(spacing: f64, sigma_along: f64, sigma_transverse: &[f64]) -> f64 {
    let along = 6.0 * std::f64::consts::SQRT_2 * sigma_along / spacing;
    let transverse: f64 = sigma_transverse
        .iter()
        .map(|s| (6.0 * std::f64::consts::SQRT_2 * s * s / (spacing * spacing)).powi(2))
        .sum();
    (along * along + transverse).sqrt()
}
