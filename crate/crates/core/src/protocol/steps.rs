use rand::seq::index;
use rand::Rng;

use super::{AbortReason, ProtocolError, ReconciliationMode};
use crate::channel::{encode_bits, encode_byte, encode_positions, MessageKind, Party, Transcript};
use crate::qmath::{make_bb84_state, measure, Basis, PureState};

/// Alice's private choices and the qubits she sends.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub bases: Vec<bool>,
    pub key_bits: Vec<bool>,
    pub qubits: Vec<PureState>,
}

pub fn alice_prepare<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Prepared {
    let mut bases = Vec::with_capacity(n);
    let mut key_bits = Vec::with_capacity(n);
    let mut qubits = Vec::with_capacity(n);
    for _ in 0..n {
        let basis = rng.random_bool(0.5);
        let bit = rng.random_bool(0.5);
        bases.push(basis);
        key_bits.push(bit);
        qubits.push(make_bb84_state(Basis::from_bit(basis), bit));
    }
    Prepared {
        bases,
        key_bits,
        qubits,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measured {
    pub bases: Vec<bool>,
    pub observed: Vec<bool>,
}

pub fn bob_measure<R: Rng + ?Sized>(qubits: &[PureState], rng: &mut R) -> Measured {
    let mut bases = Vec::with_capacity(qubits.len());
    let mut observed = Vec::with_capacity(qubits.len());
    for q in qubits {
        let basis = rng.random_bool(0.5);
        bases.push(basis);
        observed.push(measure(q, Basis::from_bit(basis), rng).0);
    }
    Measured { bases, observed }
}

fn check_len(left: usize, right: usize) -> Result<(), ProtocolError> {
    if left != right {
        return Err(ProtocolError::LengthMismatch { left, right });
    }
    Ok(())
}

/// Result of a successful error estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub error_rate: f64,
    /// Sampled indices, ascending.
    pub sample: Vec<usize>,
    /// Indices left after removing the sample, ascending.
    pub survivors: Vec<usize>,
}

/// Publishes `k` random positions of the key with both parties' values there
/// and removes them. Aborts when the mismatch rate exceeds `e_max`.
///
/// On abort the error is `Ok(Err(reason))`; structural problems are `Err`.
pub fn estimate_error<R: Rng + ?Sized>(
    key_alice: &[bool],
    key_bob: &[bool],
    k: usize,
    e_max: f64,
    rng: &mut R,
    transcript: &mut Transcript,
) -> Result<Result<Estimate, AbortReason>, ProtocolError> {
    check_len(key_alice.len(), key_bob.len())?;
    let len = key_alice.len();
    if k == 0 || k >= len {
        return Ok(Err(AbortReason::InsufficientKey {
            available: len,
            needed: k,
        }));
    }
    let mut sample = index::sample(rng, len, k).into_vec();
    sample.sort_unstable();
    let bits_a: Vec<bool> = sample.iter().map(|&i| key_alice[i]).collect();
    let bits_b: Vec<bool> = sample.iter().map(|&i| key_bob[i]).collect();
    transcript.publish(Party::Alice, MessageKind::SamplePositions, encode_positions(&sample));
    transcript.publish(Party::Alice, MessageKind::SampleBits, encode_bits(&bits_a));
    transcript.publish(Party::Bob, MessageKind::SampleBits, encode_bits(&bits_b));

    let errors = bits_a.iter().zip(&bits_b).filter(|(a, b)| a != b).count();
    let error_rate = errors as f64 / k as f64;
    if error_rate > e_max {
        return Ok(Err(AbortReason::EstimationFailed { error_rate }));
    }
    let mut in_sample = vec![false; len];
    for &i in &sample {
        in_sample[i] = true;
    }
    let survivors = (0..len).filter(|&i| !in_sample[i]).collect();
    Ok(Ok(Estimate {
        error_rate,
        sample,
        survivors,
    }))
}

/// Each party's copy of the reconciled key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconciled {
    pub alice: Vec<bool>,
    pub bob: Vec<bool>,
    pub leaked_bits: usize,
}

/// Brings the two keys into agreement or aborts.
///
/// In parity mode Alice draws `subsets` random subsets (each position kept
/// with probability 1/2) and publishes each with her parity; Bob aborts on
/// the first disagreement. Each side keeps its own string. In oracle mode
/// both sides receive Alice's string and nothing is published.
pub fn reconcile<R: Rng + ?Sized>(
    key_alice: &[bool],
    key_bob: &[bool],
    subsets: usize,
    mode: ReconciliationMode,
    rng: &mut R,
    transcript: &mut Transcript,
) -> Result<Result<Reconciled, AbortReason>, ProtocolError> {
    check_len(key_alice.len(), key_bob.len())?;
    if mode == ReconciliationMode::Oracle {
        return Ok(Ok(Reconciled {
            alice: key_alice.to_vec(),
            bob: key_alice.to_vec(),
            leaked_bits: 0,
        }));
    }
    for subset in 0..subsets {
        let members: Vec<bool> = (0..key_alice.len()).map(|_| rng.random_bool(0.5)).collect();
        let parity = |key: &[bool]| members.iter().zip(key).fold(false, |acc, (&m, &b)| acc ^ (m & b));
        let parity_a = parity(key_alice);
        transcript.publish(Party::Alice, MessageKind::ParitySubset, encode_bits(&members));
        transcript.publish(Party::Alice, MessageKind::ParityBit, encode_byte(u8::from(parity_a)));
        if parity(key_bob) != parity_a {
            transcript.publish(Party::Bob, MessageKind::ParityVerdict, encode_byte(0));
            return Ok(Err(AbortReason::ParityMismatch { subset }));
        }
    }
    transcript.publish(Party::Bob, MessageKind::ParityVerdict, encode_byte(1));
    Ok(Ok(Reconciled {
        alice: key_alice.to_vec(),
        bob: key_bob.to_vec(),
        leaked_bits: subsets,
    }))
}

/// `bases ⊕ key`, elementwise.
pub fn randomize_bases(bases: &[bool], key: &[bool]) -> Result<Vec<bool>, ProtocolError> {
    check_len(bases.len(), key.len())?;
    Ok(bases.iter().zip(key).map(|(&b, &k)| b ^ k).collect())
}

/// Inverse of [`randomize_bases`] under the same key.
pub fn recover_bases(masked: &[bool], key: &[bool]) -> Result<Vec<bool>, ProtocolError> {
    randomize_bases(masked, key)
}

/// Keeps `bits[i]` wherever `a[i] == b[i]`.
pub fn sift(a: &[bool], b: &[bool], bits: &[bool]) -> Result<Vec<bool>, ProtocolError> {
    check_len(a.len(), b.len())?;
    check_len(a.len(), bits.len())?;
    Ok(a.iter()
        .zip(b)
        .zip(bits)
        .filter(|((x, y), _)| x == y)
        .map(|(_, &bit)| bit)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::decode_bits;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn mask_examples() {
        assert_eq!(randomize_bases(&bits("1010"), &bits("0000")).unwrap(), bits("1010"));
        assert_eq!(randomize_bases(&bits("1010"), &bits("1010")).unwrap(), bits("0000"));
        assert_eq!(randomize_bases(&bits("1100"), &bits("1010")).unwrap(), bits("0110"));
        assert_eq!(recover_bases(&bits("0110"), &bits("1010")).unwrap(), bits("1100"));
        assert!(randomize_bases(&bits("10"), &bits("1")).is_err());
    }

    #[test]
    fn xor_involution_exhaustive() {
        for len in 0..=12usize {
            let all = 1u32 << len;
            let to_bits = |v: u32| (0..len).map(|i| v >> i & 1 == 1).collect::<Vec<_>>();
            // Every basis string against a few structured keys; all pairs up
            // to length 8.
            for b in 0..all {
                let bases = to_bits(b);
                for key in [0, all - 1, b, b.rotate_left(1) & (all - 1), b.wrapping_mul(2654435761) & (all - 1)] {
                    let key = to_bits(key);
                    let masked = randomize_bases(&bases, &key).unwrap();
                    assert_eq!(recover_bases(&masked, &key).unwrap(), bases);
                }
            }
            if len <= 8 {
                for b in 0..all {
                    for k in 0..all {
                        let (bases, key) = (to_bits(b), to_bits(k));
                        let masked = randomize_bases(&bases, &key).unwrap();
                        assert_eq!(recover_bases(&masked, &key).unwrap(), bases);
                    }
                }
            }
        }
    }

    #[test]
    fn sift_examples() {
        let a = bits("0110");
        assert_eq!(sift(&a, &a, &bits("1011")).unwrap(), bits("1011"));
        assert!(sift(&a, &bits("1001"), &bits("1011")).unwrap().is_empty());
        assert_eq!(sift(&bits("01"), &bits("00"), &bits("10")).unwrap(), bits("1"));
    }

    #[test]
    fn prepare_is_deterministic_and_bb84() {
        let a = alice_prepare(4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = alice_prepare(4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let four = [PureState::ZERO, PureState::ONE, PureState::PLUS, PureState::MINUS];
        for q in &a.qubits {
            assert!(four.iter().any(|s| s.same_ray(q, 1e-12)));
        }
    }

    #[test]
    fn prepare_basis_frequency() {
        let n = 100_000;
        let p = alice_prepare(n, &mut ChaCha8Rng::seed_from_u64(10));
        let ones = p.bases.iter().filter(|&&b| b).count() as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((ones - 0.5).abs() < 3.0 * sigma, "{ones}");
    }

    #[test]
    fn bob_matches_in_agreeing_bases() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = alice_prepare(n, &mut rng);
        let m = bob_measure(&p.qubits, &mut rng);
        let (mut diff_total, mut diff_agree) = (0usize, 0usize);
        for i in 0..n {
            if p.bases[i] == m.bases[i] {
                assert_eq!(p.key_bits[i], m.observed[i]);
            } else {
                diff_total += 1;
                diff_agree += usize::from(p.key_bits[i] == m.observed[i]);
            }
        }
        let rate = diff_agree as f64 / diff_total as f64;
        let sigma = (0.25 / diff_total as f64).sqrt();
        assert!((rate - 0.5).abs() < 3.0 * sigma, "{rate}");
        let empty = bob_measure(&[], &mut rng);
        assert!(empty.bases.is_empty() && empty.observed.is_empty());
    }

    #[test]
    fn estimation_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let key = bits("0110100111010010");
        let mut t = Transcript::new();
        let est = estimate_error(&key, &key, 5, 0.0, &mut rng, &mut t).unwrap().unwrap();
        assert_eq!(est.error_rate, 0.0);
        assert_eq!(est.survivors.len(), 11);
        assert_eq!(t.len(), 3);
        let flipped: Vec<bool> = key.iter().map(|b| !b).collect();
        let abort = estimate_error(&key, &flipped, 5, 0.99, &mut rng, &mut t).unwrap();
        assert_eq!(abort, Err(AbortReason::EstimationFailed { error_rate: 1.0 }));
        let over = estimate_error(&key, &key, 16, 1.0, &mut rng, &mut t).unwrap();
        assert!(matches!(over, Err(AbortReason::InsufficientKey { .. })));
    }

    #[test]
    fn reconciliation_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let key = bits("1100101011110000");
        for l in 0..6 {
            let mut t = Transcript::new();
            let r = reconcile(&key, &key, l, ReconciliationMode::ParityExchange, &mut rng, &mut t)
                .unwrap()
                .unwrap();
            assert_eq!(r.bob, key);
            assert_eq!(r.leaked_bits, l);
        }
        let other = bits("0000000000000000");
        let mut t = Transcript::new();
        let r = reconcile(&key, &other, 4, ReconciliationMode::Oracle, &mut rng, &mut t)
            .unwrap()
            .unwrap();
        assert_eq!((r.alice.as_slice(), r.bob.as_slice()), (key.as_slice(), key.as_slice()));
        assert!(t.is_empty());
    }

    #[test]
    fn parity_subsets_are_published() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let key = bits("10101");
        let mut t = Transcript::new();
        reconcile(&key, &key, 3, ReconciliationMode::ParityExchange, &mut rng, &mut t)
            .unwrap()
            .unwrap();
        let subsets: Vec<_> = t.find(Party::Alice, MessageKind::ParitySubset).collect();
        assert_eq!(subsets.len(), 3);
        for s in subsets {
            assert_eq!(decode_bits(&s.payload).unwrap().len(), 5);
        }
    }

    proptest! {
        #[test]
        fn involution_random(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 0..2000)) {
            let (bases, key): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let masked = randomize_bases(&bases, &key).unwrap();
            prop_assert_eq!(recover_bases(&masked, &key).unwrap(), bases);
        }

        #[test]
        fn sift_keeps_agreeing_positions(rows in prop::collection::vec(any::<(bool, bool, bool)>(), 0..300)) {
            let a: Vec<bool> = rows.iter().map(|r| r.0).collect();
            let b: Vec<bool> = rows.iter().map(|r| r.1).collect();
            let x: Vec<bool> = rows.iter().map(|r| r.2).collect();
            let kept = sift(&a, &b, &x).unwrap();
            prop_assert_eq!(kept.len(), rows.iter().filter(|r| r.0 == r.1).count());
        }
    }
}
