//! Key distribution sessions.
//!
//! Three variants share one pipeline shape: quantum transmission (through
//! Eve and the Pauli channel), public discussion on the [`Transcript`], and
//! sifting.
//!
//! * [`Variant::PlainBb84`] publishes the basis lists, sifts, then estimates
//!   and reconciles on the sifted key.
//! * [`Variant::Randomized`] estimates and reconciles the whole raw key
//!   first, then publishes each basis list XORed with the reconciled key.
//! * [`Variant::RandomizedE91`] replaces prepare-and-measure with singlet
//!   pairs and masks the analyzer choices the same way; a CHSH test on the
//!   mismatched settings guards the quantum channel.

mod e91;
mod session;
mod steps;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryError, AttackStrategy, EveRecord};
use crate::channel::{ChannelError, PauliChannelParams, SessionSeeds, Transcript};

pub use e91::{
    chsh_s, chsh_with_error, correlation_coefficient, generate_singlet_outcomes, run_e91_session,
    singlet_correlation, ChshCell, ChshSummary, CorrelationRecord, Spin, ALICE_ANGLES, BOB_ANGLES,
};
pub use session::run_session;
pub use steps::{
    alice_prepare, bob_measure, estimate_error, randomize_bases, reconcile, recover_bases, sift, Estimate,
    Measured, Prepared, Reconciled,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    PlainBb84,
    #[default]
    Randomized,
    RandomizedE91,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::PlainBb84, Variant::Randomized, Variant::RandomizedE91];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PlainBb84 => "plain-bb84",
            Variant::Randomized => "randomized",
            Variant::RandomizedE91 => "randomized-e91",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReconciliationMode {
    /// Random-subset parity comparison; any mismatch aborts.
    ParityExchange,
    /// Both sides end up with Alice's string and nothing is published.
    #[default]
    Oracle,
}

/// Where E91 pairs come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PairSource {
    #[default]
    Singlet,
    /// Hidden-variable source: a shared uniform angle fixes both outcomes.
    LocalDeterministic,
}

/// Parameters of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Raw key length (qubits or pairs sent).
    pub n: usize,
    /// Positions sacrificed for error estimation.
    pub k: usize,
    /// Highest tolerated sample error rate.
    pub e_max: f64,
    /// Parity subsets exchanged during reconciliation.
    pub parity_subsets: usize,
    pub variant: Variant,
    pub reconciliation: ReconciliationMode,
    pub channel: PauliChannelParams,
    pub attack: AttackStrategy,
    pub source: PairSource,
    /// Session seed; split into per-party streams by [`SessionSeeds::derive`].
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            k: 64,
            e_max: 0.3,
            parity_subsets: 16,
            variant: Variant::default(),
            reconciliation: ReconciliationMode::default(),
            channel: PauliChannelParams::ideal(),
            attack: AttackStrategy::None,
            source: PairSource::default(),
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n == 0 {
            return Err(ProtocolError::InvalidConfig("n must be at least 1".into()));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(ProtocolError::InvalidConfig(format!(
                "sample size k={} must satisfy 0 < k < n={}",
                self.k, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.e_max) {
            return Err(ProtocolError::InvalidConfig(format!("e_max={} outside [0, 1]", self.e_max)));
        }
        self.attack.validate()?;
        Ok(())
    }

    pub fn seeds(&self) -> SessionSeeds {
        SessionSeeds::derive(self.seed)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ProtocolError> {
        let config: SessionConfig = toml::from_str(text).map_err(|e| ProtocolError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

/// Why a session stopped before producing a key.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum AbortReason {
    EstimationFailed { error_rate: f64 },
    /// The parity of subset `subset` (0-based) disagreed.
    ParityMismatch { subset: usize },
    /// Too few sifted bits left to take the estimation sample.
    InsufficientKey { available: usize, needed: usize },
    ChshViolationTooSmall { s: f64 },
    /// A CHSH setting pair never occurred.
    ChshMissingGroup { alice: u8, bob: u8 },
}

impl AbortReason {
    pub fn label(&self) -> &'static str {
        match self {
            AbortReason::EstimationFailed { .. } => "estimation-failed",
            AbortReason::ParityMismatch { .. } => "parity-mismatch",
            AbortReason::InsufficientKey { .. } => "insufficient-key",
            AbortReason::ChshViolationTooSmall { .. } => "chsh-violation-too-small",
            AbortReason::ChshMissingGroup { .. } => "chsh-missing-group",
        }
    }
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::EstimationFailed { error_rate } => {
                write!(f, "sample error rate {error_rate} above threshold")
            }
            AbortReason::ParityMismatch { subset } => write!(f, "parity of subset {subset} disagreed"),
            AbortReason::InsufficientKey { available, needed } => {
                write!(f, "only {available} sifted bits, estimation needs more than {needed}")
            }
            AbortReason::ChshViolationTooSmall { s } => write!(f, "CHSH value {s} incompatible with -2√2"),
            AbortReason::ChshMissingGroup { alice, bob } => {
                write!(f, "no pairs measured at settings ({alice}, {bob})")
            }
        }
    }
}

/// Everything one session produced, aborted or not.
#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub variant: Variant,
    pub aborted: Option<AbortReason>,
    pub sifted_key_alice: Vec<bool>,
    pub sifted_key_bob: Vec<bool>,
    /// Raw indices of the bits in `sifted_key_alice`.
    pub sifted_positions: Vec<usize>,
    /// True mismatch rate between Alice's and Bob's raw bits over every
    /// position where their settings agree, before any correction.
    pub qber_estimate: f64,
    /// Error rate over the published estimation sample, when one was taken.
    pub sample_error_rate: Option<f64>,
    /// Fraction of the `n` raw positions whose settings agree.
    pub sifted_fraction: f64,
    pub transcript: Transcript,
    pub eve_record: EveRecord,
    /// Eve's guess for each bit of `sifted_key_alice`.
    pub eve_guesses: Option<Vec<bool>>,
    /// Key-derived bits exposed publicly during reconciliation.
    pub leaked_bits: usize,
    pub chsh: Option<ChshSummary>,
}

impl SessionOutcome {
    pub fn is_aborted(&self) -> bool {
        self.aborted.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("angle index {0} outside 1..=3")]
    BadAngleIndex(u8),
    #[error("no correlation records")]
    EmptyRecords,
    #[error("no records for settings ({0}, {1})")]
    MissingGroup(u8, u8),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}
