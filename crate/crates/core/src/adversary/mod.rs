//! Eavesdropper models and the analysis of what Eve learns.
//!
//! Eve acts on qubits in flight (or on Bob's half of an entangled pair) and
//! keeps an [`EveRecord`] of everything she did. After the public discussion
//! she combines that record with the [`Transcript`](crate::channel::Transcript)
//! to guess the sifted key; [`eve_mutual_information_estimate`] scores those
//! guesses against the real key.

mod analysis;
mod attack;

pub use analysis::{
    eve_bit_guesses, eve_mutual_information_estimate, session_eve_tally, transcript_net_information_gain,
    unmasked_information_gain, GuessTally,
};
pub use attack::{
    intercept_resend, probabilistic_clone_resend, AttackStrategy, CloneOutcome, Eavesdropper, EveAction,
    EveEntry, EveRecord, EveSummary, PairTamper, EVE_ANALYZER_ANGLES,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdversaryError {
    #[error("interception fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("final key length {0} must be an even number of at least 2")]
    InvalidKeyLength(usize),
    #[error("no completed (non-aborted) sessions to analyze")]
    NoCompletedSessions,
    #[error("transcript is missing the {0} announcement")]
    MissingAnnouncement(&'static str),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Math(#[from] crate::qmath::QmathError),
}
