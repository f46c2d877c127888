//! Computational-basis enumerations. Bit `i` of a mask is set when site `i`
//! holds a Rydberg excitation.

use crate::error::{Error, Result};

/// Largest chain a basis can index (masks are `u32`).
pub const MAX_BASIS_SITES: usize = 30;

pub trait Basis {
    fn n_sites(&self) -> usize;
    fn dim(&self) -> usize;
    /// Mask of the `k`-th basis state.
    fn state(&self, k: usize) -> u32;
    /// Position of a mask in the basis, if present.
    fn index_of(&self, mask: u32) -> Option<usize>;

    fn states(&self) -> Vec<u32> {
        (0..self.dim()).map(|k| self.state(k)).collect()
    }
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites > MAX_BASIS_SITES {
        return Err(Error::Capacity {
            what: "n_sites",
            requested: n_sites,
            limit: MAX_BASIS_SITES,
        });
    }
    Ok(())
}

/// Binomial coefficients C(n, k) for n ≤ MAX_BASIS_SITES.
fn binomial_table() -> Vec<Vec<usize>> {
    let n = MAX_BASIS_SITES + 1;
    let mut t = vec![vec![0usize; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for k in 1..=i {
            t[i][k] = t[i - 1][k - 1] + if k < i { t[i - 1][k] } else { 0 };
        }
    }
    t
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..k.min(n - k) {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// The full 2^N product basis, indexed by the mask itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullBasis {
    n_sites: usize,
}

impl FullBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(FullBasis { n_sites })
    }
}

impl Basis for FullBasis {
    fn n_sites(&self) -> usize {
        self.n_sites
    }
    fn dim(&self) -> usize {
        1usize << self.n_sites
    }
    fn state(&self, k: usize) -> u32 {
        k as u32
    }
    fn index_of(&self, mask: u32) -> Option<usize> {
        ((mask as usize) < self.dim()).then_some(mask as usize)
    }
}

/// Product states with exactly `n_excitations` Rydberg atoms.
///
/// States are ordered by increasing mask value, which is colexicographic
/// order of the occupied sites; the combinadic Σ_k C(c_k, k+1) over the
/// sorted occupied sites c_0 < c_1 < … is the rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n_sites: usize,
    n_excitations: usize,
    states: Vec<u32>,
    binom: Vec<Vec<usize>>,
}

impl SectorBasis {
    pub fn new(n_sites: usize, n_excitations: usize) -> Result<Self> {
        check_sites(n_sites)?;
        if n_excitations > n_sites {
            return Err(Error::Validation(format!(
                "sector N_R = {n_excitations} exceeds {n_sites} sites"
            )));
        }
        let binom = binomial_table();
        let dim = binom[n_sites][n_excitations];
        let mut basis = SectorBasis {
            n_sites,
            n_excitations,
            states: Vec::with_capacity(dim),
            binom,
        };
        basis.states = (0..dim).map(|k| basis.unrank(k)).collect();
        Ok(basis)
    }

    pub fn n_excitations(&self) -> usize {
        self.n_excitations
    }

    pub fn masks(&self) -> &[u32] {
        &self.states
    }

    /// Combinadic rank of a mask with the right popcount.
    pub fn rank(&self, mask: u32) -> Option<usize> {
        if mask.count_ones() as usize != self.n_excitations
            || (self.n_sites < 32 && mask >> self.n_sites != 0)
        {
            return None;
        }
        let mut r = 0;
        let mut m = mask;
        let mut k = 0;
        while m != 0 {
            let c = m.trailing_zeros() as usize;
            k += 1;
            r += self.binom[c][k];
            m &= m - 1;
        }
        Some(r)
    }

    pub fn unrank(&self, mut rank: usize) -> u32 {
        let mut mask = 0u32;
        for k in (1..=self.n_excitations).rev() {
            // largest c with C(c, k) <= rank
            let mut c = k - 1;
            while c + 1 < self.n_sites && self.binom[c + 1][k] <= rank {
                c += 1;
            }
            rank -= self.binom[c][k];
            mask |= 1 << c;
        }
        mask
    }
}

impl Basis for SectorBasis {
    fn n_sites(&self) -> usize {
        self.n_sites
    }
    fn dim(&self) -> usize {
        self.states.len()
    }
    fn state(&self, k: usize) -> u32 {
        self.states[k]
    }
    fn index_of(&self, mask: u32) -> Option<usize> {
        self.rank(mask)
    }
}

/// Union of the sectors N_R = 0..=max_excitations, stored sector by sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CappedBasis {
    sectors: Vec<SectorBasis>,
    offsets: Vec<usize>,
}

impl CappedBasis {
    pub fn new(n_sites: usize, max_excitations: usize) -> Result<Self> {
        let max = max_excitations.min(n_sites);
        let sectors = (0..=max)
            .map(|k| SectorBasis::new(n_sites, k))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(sectors.len() + 1);
        offsets.push(0);
        for s in &sectors {
            offsets.push(offsets.last().unwrap() + s.dim());
        }
        Ok(CappedBasis { sectors, offsets })
    }

    pub fn max_excitations(&self) -> usize {
        self.sectors.len() - 1
    }
}

impl Basis for CappedBasis {
    fn n_sites(&self) -> usize {
        self.sectors[0].n_sites()
    }
    fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }
    fn state(&self, k: usize) -> u32 {
        let s = self.offsets.partition_point(|&o| o <= k) - 1;
        self.sectors[s].state(k - self.offsets[s])
    }
    fn index_of(&self, mask: u32) -> Option<usize> {
        let pc = mask.count_ones() as usize;
        let sector = self.sectors.get(pc)?;
        sector.rank(mask).map(|r| self.offsets[pc] + r)
    }
}

/// Either the full space or a capped union of low-excitation sectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpace {
    Full(FullBasis),
    Capped(CappedBasis),
}

impl ModelSpace {
    pub fn new(n_sites: usize, max_excitations: Option<usize>) -> Result<Self> {
        Ok(match max_excitations {
            Some(m) if m < n_sites => ModelSpace::Capped(CappedBasis::new(n_sites, m)?),
            _ => ModelSpace::Full(FullBasis::new(n_sites)?),
        })
    }
}

impl Basis for ModelSpace {
    fn n_sites(&self) -> usize {
        match self {
            ModelSpace::Full(b) => b.n_sites(),
            ModelSpace::Capped(b) => b.n_sites(),
        }
    }
    fn dim(&self) -> usize {
        match self {
            ModelSpace::Full(b) => b.dim(),
            ModelSpace::Capped(b) => b.dim(),
        }
    }
    fn state(&self, k: usize) -> u32 {
        match self {
            ModelSpace::Full(b) => b.state(k),
            ModelSpace::Capped(b) => b.state(k),
        }
    }
    fn index_of(&self, mask: u32) -> Option<usize> {
        match self {
            ModelSpace::Full(b) => b.index_of(mask),
            ModelSpace::Capped(b) => b.index_of(mask),
        }
    }
}

/// Render a mask as a string of '0'/'1', site 0 first.
pub fn mask_to_bits(mask: u32, n_sites: usize) -> String {
    (0..n_sites)
        .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`mask_to_bits`].
pub fn bits_to_mask(bits: &str) -> Result<u32> {
    let mut mask = 0u32;
    for (i, ch) in bits.chars().enumerate() {
        match ch {
            '1' => mask |= 1 << i,
            '0' => {}
            other => return Err(Error::Validation(format!("bad bit character {other:?}"))),
        }
    }
    Ok(mask)
}

/// Mask with the given (0-based) sites excited.
pub fn mask_from_sites(sites: &[usize]) -> u32 {
    sites.iter().fold(0, |m, &s| m | 1 << s)
}
