//! Simulation of BB84-style key distribution in which the basis lists are
//! announced XOR-masked by the reconciled key, together with an
//! entanglement-based variant, eavesdropper models and the quantum
//! information toolkit used to analyze them.

pub mod adversary;
pub mod channel;
pub mod harness;
pub mod protocol;
pub mod qmath;

pub use adversary::{AttackStrategy, EveRecord};
pub use channel::{PauliChannelParams, SessionSeeds, Transcript};
pub use protocol::{
    run_session, AbortReason, PairSource, ReconciliationMode, SessionConfig, SessionOutcome, Variant,
};
pub use harness::{run_experiment, AggregateStats, ExperimentSpec};
