use thiserror::Error;

/// Which perturbative denominator vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceKind {
    /// Δ = 0: the drive is resonant with the bare transition.
    Bare,
    /// Δ = V_ij: a neighbouring excitation makes a second one resonant.
    Facilitation,
    /// Δ = V_ik or Δ = V_ik + V_ij: anti-blockade in the three-body channel.
    AntiBlockade,
    /// Two numerically degenerate levels of the diagonal Hamiltonian are coupled by the drive.
    Degenerate,
}

impl std::fmt::Display for ResonanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ResonanceKind::Bare => "bare resonance (detuning = 0)",
            ResonanceKind::Facilitation => "facilitation (detuning = V_ij)",
            ResonanceKind::AntiBlockade => "anti-blockade (detuning = V_ik or V_ik + V_ij)",
            ResonanceKind::Degenerate => "degenerate coupled levels",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} = {requested}, maximum {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("resonance: {kind}; perturbation theory and the U(1) symmetry break down ({detail})")]
    Resonance { kind: ResonanceKind, detail: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("cutoff error: {0}")]
    Cutoff(String),

    #[error("inconclusive bound-state classification: {0}")]
    Inconclusive(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn resonance(kind: ResonanceKind, detail: impl Into<String>) -> Self {
        Error::Resonance {
            kind,
            detail: detail.into(),
        }
    }

    /// Short machine-readable tag.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Capacity { .. } => "capacity",
            Error::Resonance { .. } => "resonance",
            Error::Validation(_) => "validation",
            Error::Cutoff(_) => "cutoff",
            Error::Inconclusive(_) => "inconclusive",
            Error::Estimation(_) => "estimation",
            Error::Integration(_) => "integration",
            Error::Config(_) => "config",
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::Capacity { .. } => 2,
            Error::Estimation(_) | Error::Inconclusive(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
