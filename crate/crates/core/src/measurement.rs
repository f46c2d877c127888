//! Readout emulation: projective sampling, per-site confusion flips,
//! excitation-number postselection and maximum-likelihood SPAM correction.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bits_to_mask, mask_to_bits};
use crate::observables::Populations;
use crate::rng::{stream, Component};

pub const DEFAULT_P_R_GIVEN_G: f64 = 0.01;
/// Trap-off duration assumed when none is configured (μs).
pub const DEFAULT_T_TRAP: f64 = 4.0;
/// Largest chain accepted by the dense estimator.
pub const MLE_MAX_SITES: usize = 12;

/// Per-site readout confusion. "r" means detected as atom loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub p_g_given_r: f64,
    pub p_r_given_g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_trap: Option<f64>,
}

impl DetectionModel {
    pub fn new(p_g_given_r: f64, p_r_given_g: f64) -> Result<Self> {
        let m = DetectionModel {
            p_g_given_r,
            p_r_given_g,
            t_trap: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn perfect() -> Self {
        DetectionModel {
            p_g_given_r: 0.0,
            p_r_given_g: 0.0,
            t_trap: None,
        }
    }

    /// P(g|r) = 1 − exp(−t_trap/t₁).
    pub fn from_lifetime(t_trap: f64, t1: f64, p_r_given_g: f64) -> Result<Self> {
        if !(t_trap >= 0.0) || !(t1 > 0.0) {
            return Err(Error::Validation(format!("need t_trap >= 0 and t1 > 0 (got {t_trap}, {t1})")));
        }
        let mut m = Self::new(-(-t_trap / t1).exp_m1(), p_r_given_g)?;
        m.t_trap = Some(t_trap);
        Ok(m)
    }

    /// Default trap-off time, the measured 43 μs lifetime and P(r|g) = 0.01.
    pub fn experimental() -> Self {
        Self::from_lifetime(DEFAULT_T_TRAP, 43.0, DEFAULT_P_R_GIVEN_G).expect("valid defaults")
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !ok(self.p_g_given_r) || !ok(self.p_r_given_g) {
            return Err(Error::Validation(format!("confusion probabilities outside [0,1]: {self:?}")));
        }
        Ok(())
    }

    pub fn is_perfect(&self) -> bool {
        self.p_g_given_r == 0.0 && self.p_r_given_g == 0.0
    }

    /// Column-stochastic site channel c[observed][true], index 1 = Rydberg.
    pub fn channel(&self) -> [[f64; 2]; 2] {
        [
            [1.0 - self.p_r_given_g, self.p_g_given_r],
            [self.p_r_given_g, 1.0 - self.p_g_given_r],
        ]
    }
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self::experimental()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub time: f64,
    pub shots: Vec<u32>,
}

/// Bitstrings per time point. Bit i set = site i detected as Rydberg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSet {
    pub n_sites: usize,
    pub seed: u64,
    pub preset: Option<String>,
    pub records: Vec<ShotRecord>,
}

impl ShotSet {
    pub fn new(n_sites: usize, seed: u64, preset: Option<String>) -> Self {
        ShotSet {
            n_sites,
            seed,
            preset,
            records: Vec::new(),
        }
    }

    pub fn total_shots(&self) -> usize {
        self.records.iter().map(|r| r.shots.len()).sum()
    }

    /// Shot file text for one record: header lines then one '0'/'1' line per shot.
    pub fn record_text(&self, index: usize) -> String {
        let r = &self.records[index];
        let mut s = String::new();
        writeln!(s, "# time_us={}", r.time).unwrap();
        writeln!(s, "# seed={}", self.seed).unwrap();
        if let Some(p) = &self.preset {
            writeln!(s, "# preset={p}").unwrap();
        }
        for &m in &r.shots {
            s.push_str(&mask_to_bits(m, self.n_sites));
            s.push('\n');
        }
        s
    }

    /// Parse a shot file written by [`ShotSet::record_text`].
    pub fn parse_record(text: &str) -> Result<ShotSet> {
        let mut time = None;
        let mut seed = 0;
        let mut preset = None;
        let mut n_sites = None;
        let mut shots = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(h) = line.strip_prefix('#') {
                let (k, v) = h.trim().split_once('=').unwrap_or((h.trim(), ""));
                match k.trim() {
                    "time_us" => time = Some(v.trim().parse().map_err(|e| Error::Config(format!("time_us: {e}")))?),
                    "seed" => seed = v.trim().parse().map_err(|e| Error::Config(format!("seed: {e}")))?,
                    "preset" => preset = Some(v.trim().to_string()),
                    _ => {}
                }
                continue;
            }
            match n_sites {
                None => n_sites = Some(line.len()),
                Some(n) if n != line.len() => {
                    return Err(Error::Config(format!("bitstring {line:?} has length {}, expected {n}", line.len())))
                }
                _ => {}
            }
            shots.push(bits_to_mask(line).map_err(|e| Error::Config(e.to_string()))?);
        }
        Ok(ShotSet {
            n_sites: n_sites.unwrap_or(0),
            seed,
            preset,
            records: vec![ShotRecord {
                time: time.unwrap_or(0.0),
                shots,
            }],
        })
    }
}

/// Draw ideal outcomes from `pop`, then flip each bit through the confusion channel.
pub fn sample_with<R: Rng>(pop: &Populations, detection: &DetectionModel, n_shots: usize, rng: &mut R) -> Result<Vec<u32>> {
    detection.validate()?;
    let total = pop.total();
    if !(total > 0.0) {
        return Err(Error::Validation("cannot sample an empty distribution".into()));
    }
    let entries = pop.entries();
    let mut cdf = Vec::with_capacity(entries.len());
    let mut acc = 0.0;
    for &(_, p) in entries {
        acc += p / total;
        cdf.push(acc);
    }
    let mut out = Vec::with_capacity(n_shots);
    for _ in 0..n_shots {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c <= u).min(entries.len() - 1);
        let mut m = entries[k].0;
        if !detection.is_perfect() {
            for i in 0..pop.n_sites() {
                let flip_p = if m >> i & 1 == 1 { detection.p_g_given_r } else { detection.p_r_given_g };
                if rng.random::<f64>() < flip_p {
                    m ^= 1 << i;
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// One record of `n_shots` drawn on the shot stream `index` of `seed`.
pub fn sample_shots(
    pop: &Populations,
    detection: &DetectionModel,
    n_shots: usize,
    seed: u64,
    index: u64,
    time: f64,
) -> Result<ShotSet> {
    if n_shots == 0 {
        return Err(Error::Validation("n_shots must be at least 1".into()));
    }
    let mut rng = stream(seed, Component::Shots, index);
    let shots = sample_with(pop, detection, n_shots, &mut rng)?;
    let mut set = ShotSet::new(pop.n_sites(), seed, None);
    set.records.push(ShotRecord { time, shots });
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Postselection {
    pub shots: ShotSet,
    /// Retained fraction per record (0 for an empty record).
    pub retention: Vec<f64>,
    /// Retained fraction over all records.
    pub overall_retention: f64,
    /// Some record kept no shots; estimators must not use it.
    pub empty: bool,
}

/// Keep only bitstrings with exactly `n_r` excitations.
pub fn postselect(shots: &ShotSet, n_r: usize) -> Postselection {
    let mut out = ShotSet::new(shots.n_sites, shots.seed, shots.preset.clone());
    let mut retention = Vec::with_capacity(shots.records.len());
    let (mut kept_total, mut all_total) = (0usize, 0usize);
    let mut empty = false;
    for r in &shots.records {
        let kept: Vec<u32> = r.shots.iter().copied().filter(|m| m.count_ones() as usize == n_r).collect();
        retention.push(if r.shots.is_empty() { 0.0 } else { kept.len() as f64 / r.shots.len() as f64 });
        empty |= kept.is_empty();
        kept_total += kept.len();
        all_total += r.shots.len();
        out.records.push(ShotRecord { time: r.time, shots: kept });
    }
    Postselection {
        shots: out,
        retention,
        overall_retention: if all_total == 0 { 0.0 } else { kept_total as f64 / all_total as f64 },
        empty,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MleMethod {
    LinearInversion,
    ExpectationMaximization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once the per-shot log-likelihood gain falls below this.
    pub tolerance: f64,
    /// Skip the linear-inversion shortcut.
    pub force_em: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iterations: 10_000,
            tolerance: 1e-10,
            force_em: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleEstimate {
    /// True-state populations indexed by mask.
    pub populations: Vec<f64>,
    /// Multinomial log-likelihood Σ_y n_y ln q_y of the counts.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub method: MleMethod,
}

/// x ← (⊗ c) x, or its transpose, one site at a time.
fn apply_channel(x: &mut [f64], n_sites: usize, c: [[f64; 2]; 2], transpose: bool) {
    let c = if transpose { [[c[0][0], c[1][0]], [c[0][1], c[1][1]]] } else { c };
    for i in 0..n_sites {
        let bit = 1usize << i;
        for m in 0..x.len() {
            if m & bit == 0 {
                let (a, b) = (x[m], x[m | bit]);
                x[m] = c[0][0] * a + c[0][1] * b;
                x[m | bit] = c[1][0] * a + c[1][1] * b;
            }
        }
    }
}

fn log_likelihood(counts: &[f64], q: &[f64]) -> f64 {
    counts
        .iter()
        .zip(q)
        .filter(|(n, _)| **n > 0.0)
        .map(|(n, q)| n * q.ln())
        .sum()
}

/// Forward model: observed-outcome distribution for true populations `p`.
pub fn observed_distribution(p: &[f64], n_sites: usize, detection: &DetectionModel) -> Vec<f64> {
    let mut q = p.to_vec();
    apply_channel(&mut q, n_sites, detection.channel(), false);
    q
}

/// Maximum-likelihood true populations given raw bitstrings.
///
/// Linear inversion is the exact maximiser whenever it lands inside the
/// simplex; otherwise expectation-maximisation from the uniform state.
pub fn mle_spam_correct(
    n_sites: usize,
    shots: &[u32],
    detection: &DetectionModel,
    options: &MleOptions,
) -> Result<MleEstimate> {
    detection.validate()?;
    if n_sites > MLE_MAX_SITES {
        return Err(Error::Capacity {
            what: "MLE sites",
            requested: n_sites,
            limit: MLE_MAX_SITES,
        });
    }
    if detection.p_g_given_r >= 0.5 || detection.p_r_given_g >= 0.5 {
        return Err(Error::Validation("confusion probabilities must be below 0.5".into()));
    }
    if shots.is_empty() {
        return Err(Error::Estimation("no shots to estimate from".into()));
    }
    let dim = 1usize << n_sites;
    let mut counts = vec![0.0; dim];
    for &m in shots {
        if m as usize >= dim {
            return Err(Error::Validation(format!("bitstring {m:#b} longer than {n_sites} sites")));
        }
        counts[m as usize] += 1.0;
    }
    let n_total = shots.len() as f64;
    let freq: Vec<f64> = counts.iter().map(|c| c / n_total).collect();

    if !options.force_em {
        let c = detection.channel();
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let inv = [[c[1][1] / det, -c[0][1] / det], [-c[1][0] / det, c[0][0] / det]];
        let mut p = freq.clone();
        apply_channel(&mut p, n_sites, inv, false);
        if p.iter().all(|&x| x >= 0.0) {
            let q = observed_distribution(&p, n_sites, detection);
            return Ok(MleEstimate {
                log_likelihood: log_likelihood(&counts, &q),
                populations: p,
                iterations: 0,
                method: MleMethod::LinearInversion,
            });
        }
    }

    let em = Em {
        counts: &counts,
        freq: &freq,
        n_sites,
        detection,
    };
    let mut p = vec![1.0 / dim as f64; dim];
    let mut ll = em.log_likelihood(&p);
    let floor = -1e-12 * (ll.abs() / n_total).max(1.0);
    for it in 1..=options.max_iterations {
        let p1 = em.step(&p);
        let ll1 = em.log_likelihood(&p1);
        let p2 = em.step(&p1);
        let ll2 = em.log_likelihood(&p2);
        if (ll1 - ll) / n_total < floor || (ll2 - ll1) / n_total < floor {
            return Err(Error::Estimation(format!(
                "EM log-likelihood decreased at iteration {it} ({ll} -> {ll1} -> {ll2})"
            )));
        }
        let (next_p, next) = match em.extrapolate(&p, &p1, &p2) {
            Some((x, lx)) if lx >= ll2 => (x, lx),
            _ => (p2, ll2),
        };
        let gain = (next - ll) / n_total;
        p = next_p;
        ll = next;
        if gain < options.tolerance {
            return Ok(MleEstimate {
                populations: p,
                log_likelihood: ll,
                iterations: it,
                method: MleMethod::ExpectationMaximization,
            });
        }
    }
    Err(Error::Estimation(format!(
        "EM did not converge in {} iterations (log-likelihood {ll})",
        options.max_iterations
    )))
}

/// Expectation-maximisation for the factorised confusion channel.
struct Em<'a> {
    counts: &'a [f64],
    freq: &'a [f64],
    n_sites: usize,
    detection: &'a DetectionModel,
}

impl Em<'_> {
    fn log_likelihood(&self, p: &[f64]) -> f64 {
        log_likelihood(self.counts, &observed_distribution(p, self.n_sites, self.detection))
    }

    /// One multiplicative EM update; never decreases the likelihood.
    fn step(&self, p: &[f64]) -> Vec<f64> {
        let q = observed_distribution(p, self.n_sites, self.detection);
        let mut r: Vec<f64> = self
            .freq
            .iter()
            .zip(&q)
            .map(|(f, q)| if *f > 0.0 { f / q } else { 0.0 })
            .collect();
        apply_channel(&mut r, self.n_sites, self.detection.channel(), true);
        let mut out: Vec<f64> = p.iter().zip(&r).map(|(pi, ri)| pi * ri).collect();
        let s: f64 = out.iter().sum();
        out.iter_mut().for_each(|x| *x /= s);
        out
    }

    /// SQUAREM extrapolation through two EM steps, followed by one
    /// stabilising EM step. `None` when no admissible point is found.
    fn extrapolate(&self, p0: &[f64], p1: &[f64], p2: &[f64]) -> Option<(Vec<f64>, f64)> {
        let r: Vec<f64> = p1.iter().zip(p0).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = p2.iter().zip(p1).zip(&r).map(|((c, b), r)| c - b - r).collect();
        let (nr, nv) = (norm(&r), norm(&v));
        if !(nv > 0.0) {
            return None;
        }
        let mut alpha = -(nr / nv);
        // halve the distance to α = −1, where the point is plain EM
        for _ in 0..40 {
            if alpha >= -1.0 {
                break;
            }
            let x: Vec<f64> = p0
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((p, r), v)| p - 2.0 * alpha * r + alpha * alpha * v)
                .collect();
            if x.iter().all(|&e| e >= 0.0) {
                let y = self.step(&x);
                let ly = self.log_likelihood(&y);
                if y.iter().all(|e| e.is_finite()) && ly.is_finite() {
                    return Some((y, ly));
                }
            }
            alpha = 0.5 * (alpha - 1.0);
        }
        None
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|e| e * e).sum::<f64>().sqrt()
}
