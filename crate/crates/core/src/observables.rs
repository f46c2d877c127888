//! Reported quantities computed from computational-basis populations, which
//! come either from exact states or from measured shots.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, StateVector};
use crate::model::{binomial, Basis, MAX_BASIS_SITES};

/// Probability distribution over product states, sorted by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Populations {
    n_sites: usize,
    entries: Vec<(u32, f64)>,
    /// Number of shots behind an empirical distribution.
    shots: Option<usize>,
}

impl Populations {
    /// Merge duplicate masks and drop zero weights.
    pub fn new(n_sites: usize, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        if n_sites > MAX_BASIS_SITES {
            return Err(Error::Capacity {
                what: "n_sites",
                requested: n_sites,
                limit: MAX_BASIS_SITES,
            });
        }
        if entries.iter().any(|&(m, p)| !(p >= 0.0) || !p.is_finite() || (n_sites < 32 && m >> n_sites != 0)) {
            return Err(Error::Validation("populations must be finite, non-negative and inside the chain".into()));
        }
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (m, p) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == m => last.1 += p,
                _ => merged.push((m, p)),
            }
        }
        merged.retain(|e| e.1 > 0.0);
        Ok(Populations {
            n_sites,
            entries: merged,
            shots: None,
        })
    }

    /// Point mass on one product state.
    pub fn product(n_sites: usize, mask: u32) -> Result<Self> {
        Self::new(n_sites, vec![(mask, 1.0)])
    }

    pub fn from_state<B: Basis>(psi: &StateVector, basis: &B) -> Result<Self> {
        let e = (0..basis.dim()).map(|k| (basis.state(k), psi[k].norm_sqr())).collect();
        Self::new(basis.n_sites(), e)
    }

    pub fn from_density<B: Basis>(rho: &DensityMatrix, basis: &B) -> Result<Self> {
        // tiny negative diagonals from integration round-off are clipped
        let e = (0..basis.dim()).map(|k| (basis.state(k), rho[(k, k)].re.max(0.0))).collect();
        Self::new(basis.n_sites(), e)
    }

    /// Dense probabilities indexed by mask.
    pub fn from_dense(n_sites: usize, probs: &[f64]) -> Result<Self> {
        Self::new(n_sites, probs.iter().enumerate().map(|(m, &p)| (m as u32, p)).collect())
    }

    /// Empirical frequencies of a list of bitstrings.
    pub fn from_shots(n_sites: usize, shots: &[u32]) -> Result<Self> {
        let w = if shots.is_empty() { 0.0 } else { 1.0 / shots.len() as f64 };
        let mut p = Self::new(n_sites, shots.iter().map(|&m| (m, w)).collect())?;
        p.shots = Some(shots.len());
        Ok(p)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn shots(&self) -> Option<usize> {
        self.shots
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn probability(&self, mask: u32) -> f64 {
        self.entries
            .binary_search_by_key(&mask, |e| e.0)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1usize << self.n_sites];
        for &(m, p) in &self.entries {
            v[m as usize] = p;
        }
        v
    }

    /// Total weight in the sector with `n_r` excitations.
    pub fn sector_weight(&self, n_r: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.0.count_ones() as usize == n_r)
            .map(|e| e.1)
            .sum()
    }

    /// Condition on N_R = n_r; returns the renormalised distribution and the
    /// retained weight. Fails when nothing survives.
    pub fn postselect(&self, n_r: usize) -> Result<(Populations, f64)> {
        let total = self.total();
        let kept: Vec<(u32, f64)> = self
            .entries
            .iter()
            .copied()
            .filter(|e| e.0.count_ones() as usize == n_r)
            .collect();
        let w: f64 = kept.iter().map(|e| e.1).sum();
        if !(w > 0.0) || !(total > 0.0) {
            return Err(Error::Estimation(format!("postselection on N_R = {n_r} retained nothing")));
        }
        let shots = self.shots.map(|n| (w / total * n as f64).round() as usize);
        let p = Populations {
            n_sites: self.n_sites,
            entries: kept.into_iter().map(|(m, p)| (m, p / w)).collect(),
            shots,
        };
        Ok((p, w / total))
    }

    /// Equal-weight mixture.
    pub fn average(items: &[Populations]) -> Result<Populations> {
        let first = items
            .first()
            .ok_or_else(|| Error::Validation("cannot average zero distributions".into()))?;
        if items.iter().any(|p| p.n_sites != first.n_sites) {
            return Err(Error::Validation("distributions over different chain lengths".into()));
        }
        let w = 1.0 / items.len() as f64;
        let mut dense = vec![0.0; 1usize << first.n_sites];
        for p in items {
            for &(m, x) in &p.entries {
                dense[m as usize] += w * x;
            }
        }
        Populations::from_dense(first.n_sites, &dense)
    }

    fn normalised_weight(&self) -> Result<f64> {
        let t = self.total();
        if !(t > 0.0) {
            return Err(Error::Estimation("empty distribution".into()));
        }
        Ok(t)
    }
}

/// ⟨n̂_i⟩ per site.
pub fn rydberg_density(p: &Populations) -> Result<Vec<f64>> {
    let t = p.normalised_weight()?;
    let mut d = vec![0.0; p.n_sites];
    for &(m, w) in &p.entries {
        for (i, di) in d.iter_mut().enumerate() {
            if m >> i & 1 == 1 {
                *di += w / t;
            }
        }
    }
    Ok(d)
}

/// Binomial standard error of each shot-based density.
pub fn density_standard_errors(p: &Populations) -> Option<Vec<f64>> {
    let n = p.shots? as f64;
    let d = rydberg_density(p).ok()?;
    Some(d.iter().map(|x| (x * (1.0 - x) / n).sqrt()).collect())
}

/// Σ_i (i − origin)² ⟨n̂_i⟩ / N_R in lattice units.
pub fn mean_square_displacement(density: &[f64], origin: f64, n_r: usize) -> f64 {
    if n_r == 0 {
        return 0.0;
    }
    density
        .iter()
        .enumerate()
        .map(|(i, n)| (i as f64 - origin).powi(2) * n)
        .sum::<f64>()
        / n_r as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelatorSource {
    Exact,
    Shots { count: usize },
}

/// Γ_ij = ⟨n̂_i n̂_j⟩ for i ≠ j; symmetric with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorMap {
    pub gamma: DMatrix<f64>,
    pub source: CorrelatorSource,
}

impl CorrelatorMap {
    pub fn n_sites(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gamma[(i, j)]
    }

    /// Γ_tot = Σ_{i<j} Γ_ij.
    pub fn total(&self) -> f64 {
        (1..=self.n_sites()).map(|d| self.distance_weight(d)).sum()
    }

    /// Σ_i Γ_{i,i+d}.
    pub fn distance_weight(&self, d: usize) -> f64 {
        (0..self.n_sites().saturating_sub(d)).map(|i| self.gamma[(i, i + d)]).sum()
    }
}

/// Pair correlator of a distribution; postselect to N_R = 2 first for the
/// normalisation used in participation ratios.
pub fn correlator(p: &Populations) -> Result<CorrelatorMap> {
    let t = p.normalised_weight()?;
    let n = p.n_sites;
    let mut g = DMatrix::zeros(n, n);
    for &(m, w) in &p.entries {
        let sites: Vec<usize> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
        for (a, &i) in sites.iter().enumerate() {
            for &j in &sites[a + 1..] {
                g[(i, j)] += w / t;
                g[(j, i)] += w / t;
            }
        }
    }
    let source = match p.shots {
        Some(count) => CorrelatorSource::Shots { count },
        None => CorrelatorSource::Exact,
    };
    Ok(CorrelatorMap { gamma: g, source })
}

/// (BR₁, BR₂) = (Σ_i Γ_{i,i+1}, Σ_i Γ_{i,i+2}) / Γ_tot.
pub fn participation_ratios(c: &CorrelatorMap) -> Result<(f64, f64)> {
    let tot = c.total();
    if !(tot > 0.0) {
        return Err(Error::Estimation("participation ratio with zero total correlation".into()));
    }
    Ok((c.distance_weight(1) / tot, c.distance_weight(2) / tot))
}

/// BR₁ and BR₂ for a correlator spread evenly over all pairs of an N-chain.
pub fn uniform_baselines(n_sites: usize) -> (f64, f64) {
    let pairs = binomial(n_sites, 2) as f64;
    if pairs == 0.0 {
        return (0.0, 0.0);
    }
    (n_sites.saturating_sub(1) as f64 / pairs, n_sites.saturating_sub(2) as f64 / pairs)
}

/// ⟨N̂_RR⟩ = Σ_i ⟨n̂_i n̂_{i+1}⟩.
pub fn bond_count(p: &Populations) -> Result<f64> {
    let t = p.normalised_weight()?;
    Ok(p.entries
        .iter()
        .map(|&(m, w)| (m & (m >> 1)).count_ones() as f64 * w / t)
        .sum())
}

/// Frequency (cycles per unit time) from the upward crossings of a sampled
/// signal through its mean. Needs at least two crossings.
pub fn oscillation_frequency(times: &[f64], signal: &[f64]) -> Result<f64> {
    if times.len() != signal.len() || times.len() < 3 {
        return Err(Error::Validation("need matching time and signal samples".into()));
    }
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let crossings: Vec<f64> = (1..signal.len())
        .filter(|&k| signal[k - 1] < mean && signal[k] >= mean)
        .map(|k| {
            let (y0, y1) = (signal[k - 1] - mean, signal[k] - mean);
            times[k - 1] + (times[k] - times[k - 1]) * (-y0 / (y1 - y0))
        })
        .collect();
    if crossings.len() < 2 {
        return Err(Error::Estimation("fewer than two mean crossings".into()));
    }
    Ok((crossings.len() - 1) as f64 / (crossings[crossings.len() - 1] - crossings[0]))
}
