//! Fixtures shared by the benchmarks.

use qkdmask::{AttackStrategy, ReconciliationMode, SessionConfig, Variant};

/// A session that completes under every attack: oracle reconciliation and
/// no abort threshold.
pub fn completing_session(variant: Variant, attack: AttackStrategy, n: usize) -> SessionConfig {
    SessionConfig {
        n,
        k: n / 16,
        e_max: 1.0,
        variant,
        attack,
        reconciliation: ReconciliationMode::Oracle,
        seed: 1,
        ..SessionConfig::default()
    }
}
