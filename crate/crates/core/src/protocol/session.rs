use super::steps::{alice_prepare, bob_measure, estimate_error, randomize_bases, reconcile, recover_bases};
use super::{run_e91_session, AbortReason, ProtocolError, SessionConfig, SessionOutcome, Variant};
use crate::adversary::{eve_bit_guesses, Eavesdropper};
use crate::channel::{encode_bits, transmit, MessageKind, Party, Transcript};

/// Runs one session end to end. Aborts are reported in the outcome; only
/// invalid configurations are errors.
pub fn run_session(config: &SessionConfig) -> Result<SessionOutcome, ProtocolError> {
    config.validate()?;
    if config.variant == Variant::RandomizedE91 {
        return run_e91_session(config);
    }
    let seeds = config.seeds();
    let mut alice_rng = seeds.alice_rng();
    let mut bob_rng = seeds.bob_rng();
    let mut eve_rng = seeds.eve_rng();
    let mut channel_rng = seeds.channel_rng();
    let n = config.n;

    let prepared = alice_prepare(n, &mut alice_rng);
    let mut eve = Eavesdropper::new(config.attack);
    let delivered: Vec<_> = prepared
        .qubits
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let q = eve.tamper(i, q, &mut eve_rng);
            transmit(&q, &config.channel, &mut channel_rng)
        })
        .collect();
    let measured = bob_measure(&delivered, &mut bob_rng);
    let (bases_a, key_a) = (&prepared.bases, &prepared.key_bits);
    let (bases_b, key_b) = (&measured.bases, &measured.observed);

    let matched: Vec<usize> = (0..n).filter(|&i| bases_a[i] == bases_b[i]).collect();
    let matched_errors = matched.iter().filter(|&&i| key_a[i] != key_b[i]).count();
    let qber_estimate = if matched.is_empty() {
        0.0
    } else {
        matched_errors as f64 / matched.len() as f64
    };

    let mut transcript = Transcript::new();
    let mut outcome = SessionOutcome {
        variant: config.variant,
        aborted: None,
        sifted_key_alice: Vec::new(),
        sifted_key_bob: Vec::new(),
        sifted_positions: Vec::new(),
        qber_estimate,
        sample_error_rate: None,
        sifted_fraction: matched.len() as f64 / n as f64,
        transcript: Transcript::new(),
        eve_record: Default::default(),
        eve_guesses: None,
        leaked_bits: 0,
        chsh: None,
    };

    let result = match config.variant {
        Variant::PlainBb84 => plain_discussion(config, &matched, key_a, key_b, bases_a, bases_b, &mut alice_rng, &mut transcript, &mut outcome),
        _ => masked_discussion(config, key_a, key_b, bases_a, bases_b, &mut alice_rng, &mut transcript, &mut outcome),
    }?;
    if let Err(reason) = result {
        if let AbortReason::EstimationFailed { error_rate } = reason {
            outcome.sample_error_rate = Some(error_rate);
        }
        outcome.aborted = Some(reason);
        outcome.sifted_key_alice.clear();
        outcome.sifted_key_bob.clear();
        outcome.sifted_positions.clear();
    }
    outcome.leaked_bits = transcript.find(Party::Alice, MessageKind::ParityBit).count();

    let record = eve.into_record();
    if let Ok(raw) = eve_bit_guesses(&record, &transcript, n, seeds.eve) {
        outcome.eve_guesses = Some(outcome.sifted_positions.iter().map(|&i| raw[i]).collect());
    }
    outcome.eve_record = record;
    outcome.transcript = transcript;
    Ok(outcome)
}

type Discussion = Result<Result<(), AbortReason>, ProtocolError>;

/// Bases in the clear, sift, then estimate and reconcile the sifted key.
#[allow(clippy::too_many_arguments)]
fn plain_discussion(
    config: &SessionConfig,
    matched: &[usize],
    key_a: &[bool],
    key_b: &[bool],
    bases_a: &[bool],
    bases_b: &[bool],
    rng: &mut rand_chacha::ChaCha8Rng,
    transcript: &mut Transcript,
    outcome: &mut SessionOutcome,
) -> Discussion {
    transcript.publish(Party::Alice, MessageKind::Bases, encode_bits(bases_a));
    transcript.publish(Party::Bob, MessageKind::Bases, encode_bits(bases_b));
    let sifted_a: Vec<bool> = matched.iter().map(|&i| key_a[i]).collect();
    let sifted_b: Vec<bool> = matched.iter().map(|&i| key_b[i]).collect();

    let estimate = match estimate_error(&sifted_a, &sifted_b, config.k, config.e_max, rng, transcript)? {
        Ok(e) => e,
        Err(reason) => return Ok(Err(reason)),
    };
    outcome.sample_error_rate = Some(estimate.error_rate);
    let rest_a: Vec<bool> = estimate.survivors.iter().map(|&j| sifted_a[j]).collect();
    let rest_b: Vec<bool> = estimate.survivors.iter().map(|&j| sifted_b[j]).collect();
    let reconciled = match reconcile(&rest_a, &rest_b, config.parity_subsets, config.reconciliation, rng, transcript)? {
        Ok(r) => r,
        Err(reason) => return Ok(Err(reason)),
    };
    outcome.sifted_positions = estimate.survivors.iter().map(|&j| matched[j]).collect();
    outcome.sifted_key_alice = reconciled.alice;
    outcome.sifted_key_bob = reconciled.bob;
    Ok(Ok(()))
}

/// Estimate and reconcile the raw key, then announce bases masked by it.
#[allow(clippy::too_many_arguments)]
fn masked_discussion(
    config: &SessionConfig,
    key_a: &[bool],
    key_b: &[bool],
    bases_a: &[bool],
    bases_b: &[bool],
    rng: &mut rand_chacha::ChaCha8Rng,
    transcript: &mut Transcript,
    outcome: &mut SessionOutcome,
) -> Discussion {
    let estimate = match estimate_error(key_a, key_b, config.k, config.e_max, rng, transcript)? {
        Ok(e) => e,
        Err(reason) => return Ok(Err(reason)),
    };
    outcome.sample_error_rate = Some(estimate.error_rate);
    let survivors = &estimate.survivors;
    let pick = |v: &[bool]| -> Vec<bool> { survivors.iter().map(|&i| v[i]).collect() };
    let reconciled = match reconcile(
        &pick(key_a),
        &pick(key_b),
        config.parity_subsets,
        config.reconciliation,
        rng,
        transcript,
    )? {
        Ok(r) => r,
        Err(reason) => return Ok(Err(reason)),
    };
    let (own_a, own_b) = (pick(bases_a), pick(bases_b));

    // Each side masks and unmasks with its own copy of the reconciled key.
    let masked_a = randomize_bases(&own_a, &reconciled.alice)?;
    let masked_b = randomize_bases(&own_b, &reconciled.bob)?;
    transcript.publish(Party::Alice, MessageKind::MaskedBases, encode_bits(&masked_a));
    transcript.publish(Party::Bob, MessageKind::MaskedBases, encode_bits(&masked_b));
    let bob_seen_by_alice = recover_bases(&masked_b, &reconciled.alice)?;
    let alice_seen_by_bob = recover_bases(&masked_a, &reconciled.bob)?;

    for j in 0..survivors.len() {
        if own_a[j] == bob_seen_by_alice[j] {
            outcome.sifted_positions.push(survivors[j]);
            outcome.sifted_key_alice.push(reconciled.alice[j]);
        }
        if alice_seen_by_bob[j] == own_b[j] {
            outcome.sifted_key_bob.push(reconciled.bob[j]);
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AttackStrategy;
    use crate::channel::{decode_bits, PauliChannelParams};
    use crate::protocol::ReconciliationMode;

    fn config(variant: Variant) -> SessionConfig {
        SessionConfig {
            n: 1024,
            k: 64,
            e_max: 1.0,
            variant,
            reconciliation: ReconciliationMode::Oracle,
            seed: 77,
            ..SessionConfig::default()
        }
    }

    #[test]
    fn ideal_randomized_session() {
        let out = run_session(&config(Variant::Randomized)).unwrap();
        assert!(out.aborted.is_none());
        assert_eq!(out.sifted_key_alice, out.sifted_key_bob);
        assert_eq!(out.qber_estimate, 0.0);
        assert_eq!(out.sifted_key_alice.len(), out.sifted_positions.len());
        let sigma = (0.25 / 1024.0f64).sqrt();
        assert!((out.sifted_fraction - 0.5).abs() < 4.0 * sigma);
    }

    #[test]
    fn ideal_plain_session_with_parity() {
        let cfg = SessionConfig {
            reconciliation: ReconciliationMode::ParityExchange,
            e_max: 0.0,
            ..config(Variant::PlainBb84)
        };
        let out = run_session(&cfg).unwrap();
        assert!(out.aborted.is_none(), "{:?}", out.aborted);
        assert_eq!(out.sifted_key_alice, out.sifted_key_bob);
        assert_eq!(out.leaked_bits, cfg.parity_subsets);
    }

    #[test]
    fn randomized_transcript_hides_bases() {
        let cfg = config(Variant::Randomized);
        let out = run_session(&cfg).unwrap();
        let seeds = cfg.seeds();
        let prepared = alice_prepare(cfg.n, &mut seeds.alice_rng());
        assert!(out.transcript.first(Party::Alice, MessageKind::Bases).is_none());
        for r in out.transcript.records() {
            if r.kind == MessageKind::MaskedBases {
                let masked = decode_bits(&r.payload).unwrap();
                assert_ne!(masked, prepared.bases);
            }
        }
    }

    #[test]
    fn clone_attack_trips_tight_threshold() {
        let cfg = SessionConfig {
            attack: AttackStrategy::clone_resend(),
            e_max: 0.05,
            n: 4096,
            k: 512,
            ..config(Variant::PlainBb84)
        };
        let aborted = (0..20)
            .filter(|&s| run_session(&SessionConfig { seed: s, ..cfg.clone() }).unwrap().is_aborted())
            .count();
        assert_eq!(aborted, 20);
    }

    #[test]
    fn aborted_sessions_keep_transcript_and_record() {
        let cfg = SessionConfig {
            attack: AttackStrategy::intercept_resend(),
            e_max: 0.0,
            ..config(Variant::Randomized)
        };
        let out = run_session(&cfg).unwrap();
        assert!(matches!(out.aborted, Some(AbortReason::EstimationFailed { .. })));
        assert!(!out.transcript.is_empty());
        assert_eq!(out.eve_record.intercepted(), cfg.n);
        assert!(out.sifted_key_alice.is_empty());
    }

    #[test]
    fn noisy_channel_raises_qber() {
        let cfg = SessionConfig {
            channel: PauliChannelParams::new(0.1, 0.0, 0.0).unwrap(),
            n: 20_000,
            ..config(Variant::PlainBb84)
        };
        let out = run_session(&cfg).unwrap();
        // X flips Z-basis bits only, so half the sifted positions see it.
        assert!((out.qber_estimate - 0.05).abs() < 0.01, "{}", out.qber_estimate);
    }

    #[test]
    fn sessions_are_reproducible() {
        let cfg = SessionConfig {
            attack: AttackStrategy::clone_resend(),
            ..config(Variant::Randomized)
        };
        let a = run_session(&cfg).unwrap();
        let b = run_session(&cfg).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.sifted_key_alice, b.sifted_key_alice);
        assert_eq!(a.eve_guesses, b.eve_guesses);
    }
}
