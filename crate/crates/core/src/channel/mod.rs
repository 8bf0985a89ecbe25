//! Quantum and classical channels between Alice and Bob.
//!
//! The quantum side is a Pauli channel acting on qubits in flight. The
//! classical side is an authenticated, append-only [`Transcript`] that every
//! party (including Eve) can read but nobody can rewrite.

mod pauli;
mod seeds;
mod transcript;

pub use pauli::{transmit, Pauli, PauliChannelParams};
pub use seeds::{SessionSeeds, SEED_STREAM_CONSTANTS};
pub use transcript::{
    decode_bits, decode_byte, decode_positions, encode_bits, encode_byte, encode_positions,
    MessageKind, Party, Record, Transcript,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid Pauli probabilities p_x={p_x}, p_y={p_y}, p_z={p_z}")]
    InvalidPauliParams { p_x: f64, p_y: f64, p_z: f64 },
    #[error("transcript line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("payload decode failed: {0}")]
    MalformedPayload(String),
}
