//! Entanglement-based variant with masked analyzer announcements.
//!
//! Analyzer axes lie in the x–z plane of the Bloch sphere; an angle φ is
//! measured from +z. A singlet gives `E(φa, φb) = −cos(φa − φb)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::steps::reconcile;
use super::{AbortReason, PairSource, ProtocolError, SessionConfig, SessionOutcome};
use crate::adversary::{Eavesdropper, PairTamper};
use crate::channel::{encode_bits, encode_positions, MessageKind, Party, Pauli, Transcript};

pub const ALICE_ANGLES: [f64; 3] = [0.0, FRAC_PI_4, FRAC_PI_2];
pub const BOB_ANGLES: [f64; 3] = [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];

/// Setting pairs (Alice, Bob) with parallel analyzers.
const KEY_SETTINGS: [(u8, u8); 2] = [(2, 1), (3, 2)];
/// Setting pairs entering S = E11 − E13 + E31 + E33, with their signs.
const CHSH_SETTINGS: [(u8, u8, f64); 4] = [(1, 1, 1.0), (1, 3, -1.0), (3, 1, 1.0), (3, 3, 1.0)];
const QUANTUM_S: f64 = -2.0 * std::f64::consts::SQRT_2;
const CHSH_MIN_THRESHOLD: f64 = 0.2;
const CHSH_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn from_plus(plus: bool) -> Self {
        if plus {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    /// +1 ↦ 1, −1 ↦ 0.
    pub fn as_bit(self) -> bool {
        self == Spin::Up
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelationRecord {
    pub alice_angle_index: u8,
    pub bob_angle_index: u8,
    pub alice_outcome: Spin,
    pub bob_outcome: Spin,
}

fn angle(table: &[f64; 3], index: u8) -> Result<f64, ProtocolError> {
    match index {
        1..=3 => Ok(table[usize::from(index - 1)]),
        other => Err(ProtocolError::BadAngleIndex(other)),
    }
}

/// `−cos(Φᵃᵢ − Φᵇⱼ)`.
pub fn singlet_correlation(i: u8, j: u8) -> Result<f64, ProtocolError> {
    Ok(-(angle(&ALICE_ANGLES, i)? - angle(&BOB_ANGLES, j)?).cos())
}

fn singlet_pair<R: Rng + ?Sized>(alice_angle: f64, bob_angle: f64, rng: &mut R) -> (Spin, Spin) {
    let alice = rng.random_bool(0.5);
    let same = (1.0 - (alice_angle - bob_angle).cos()) / 2.0;
    let bob = if rng.random_bool(same.clamp(0.0, 1.0)) { alice } else { !alice };
    (Spin::from_plus(alice), Spin::from_plus(bob))
}

/// Samples one singlet measured at Alice setting `i` and Bob setting `j`.
pub fn generate_singlet_outcomes<R: Rng + ?Sized>(i: u8, j: u8, rng: &mut R) -> Result<CorrelationRecord, ProtocolError> {
    let (a, b) = singlet_pair(angle(&ALICE_ANGLES, i)?, angle(&BOB_ANGLES, j)?, rng);
    Ok(CorrelationRecord {
        alice_angle_index: i,
        bob_angle_index: j,
        alice_outcome: a,
        bob_outcome: b,
    })
}

/// `(N₊₊ + N₋₋ − N₊₋ − N₋₊) / N`.
pub fn correlation_coefficient(records: &[CorrelationRecord]) -> Result<f64, ProtocolError> {
    if records.is_empty() {
        return Err(ProtocolError::EmptyRecords);
    }
    let sum: i64 = records
        .iter()
        .map(|r| i64::from(r.alice_outcome.value() * r.bob_outcome.value()))
        .sum();
    Ok(sum as f64 / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshCell {
    pub alice: u8,
    pub bob: u8,
    pub correlation: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshSummary {
    pub s: f64,
    /// Standard error of `s` from the per-cell sample counts.
    pub sigma: f64,
    pub cells: Vec<ChshCell>,
}

/// S and its standard error `sqrt(Σ (1 − E²) / N)`. Records at other
/// settings are ignored.
pub fn chsh_with_error(records: &[CorrelationRecord]) -> Result<ChshSummary, ProtocolError> {
    let mut s = 0.0;
    let mut variance = 0.0;
    let mut cells = Vec::with_capacity(CHSH_SETTINGS.len());
    for (i, j, sign) in CHSH_SETTINGS {
        let group: Vec<CorrelationRecord> = records
            .iter()
            .filter(|r| r.alice_angle_index == i && r.bob_angle_index == j)
            .copied()
            .collect();
        if group.is_empty() {
            return Err(ProtocolError::MissingGroup(i, j));
        }
        let e = correlation_coefficient(&group)?;
        s += sign * e;
        variance += (1.0 - e * e) / group.len() as f64;
        cells.push(ChshCell {
            alice: i,
            bob: j,
            correlation: e,
            count: group.len(),
        });
    }
    Ok(ChshSummary {
        s,
        sigma: variance.sqrt(),
        cells,
    })
}

pub fn chsh_s(records: &[CorrelationRecord]) -> Result<f64, ProtocolError> {
    Ok(chsh_with_error(records)?.s)
}

/// Bob's measurement after a Pauli equals measuring the untouched particle
/// along the reflected axis.
fn conjugated_angle(pauli: Pauli, phi: f64) -> f64 {
    match pauli {
        Pauli::I => phi,
        Pauli::X => PI - phi,
        Pauli::Y => phi + PI,
        Pauli::Z => -phi,
    }
}

fn spin_along<R: Rng + ?Sized>(polarization: f64, axis: f64, rng: &mut R) -> Spin {
    Spin::from_plus(rng.random_bool(((1.0 + (axis - polarization).cos()) / 2.0).clamp(0.0, 1.0)))
}

fn deterministic_spin(axis: f64, lambda: f64) -> Spin {
    Spin::from_plus((axis - lambda).cos() >= 0.0)
}

fn pair_outcome<R: Rng + ?Sized>(
    alice_angle: f64,
    bob_angle: f64,
    source: PairSource,
    tamper: PairTamper,
    noise: Pauli,
    rng: &mut R,
) -> (Spin, Spin) {
    let bob_angle = conjugated_angle(noise, bob_angle);
    match source {
        PairSource::Singlet => match tamper {
            PairTamper::Untouched => singlet_pair(alice_angle, bob_angle, rng),
            PairTamper::Pauli(p) => singlet_pair(alice_angle, conjugated_angle(p, bob_angle), rng),
            PairTamper::Measured { angle, plus } => {
                // Alice's particle collapsed opposite to Eve's result.
                let alice_pol = if plus { angle + PI } else { angle };
                let bob_pol = if plus { angle } else { angle + PI };
                (spin_along(alice_pol, alice_angle, rng), spin_along(bob_pol, bob_angle, rng))
            }
            PairTamper::Replaced { angle } => {
                (Spin::from_plus(rng.random_bool(0.5)), spin_along(angle, bob_angle, rng))
            }
        },
        PairSource::LocalDeterministic => {
            let lambda = rng.random_range(0.0..2.0 * PI);
            let alice = deterministic_spin(alice_angle, lambda);
            let bob = match tamper {
                PairTamper::Untouched => deterministic_spin(bob_angle, lambda + PI),
                PairTamper::Pauli(p) => deterministic_spin(conjugated_angle(p, bob_angle), lambda + PI),
                PairTamper::Measured { angle, plus } => {
                    spin_along(if plus { angle } else { angle + PI }, bob_angle, rng)
                }
                PairTamper::Replaced { angle } => spin_along(angle, bob_angle, rng),
            };
            (alice, bob)
        }
    }
}

/// Two bits per setting, `index − 1`, high bit first.
fn encode_angles(indices: &[u8]) -> Vec<bool> {
    indices
        .iter()
        .flat_map(|&i| {
            let v = i - 1;
            [v & 2 != 0, v & 1 != 0]
        })
        .collect()
}

/// Inverse of [`encode_angles`]; the unused code `11` decodes to 4.
fn decode_angles(bits: &[bool]) -> Vec<u8> {
    bits.chunks_exact(2)
        .map(|c| 1 + (u8::from(c[0]) << 1 | u8::from(c[1])))
        .collect()
}

/// XOR with `key` repeated cyclically. `key` must be nonempty.
fn cyclic_mask(bits: &[bool], key: &[bool]) -> Vec<bool> {
    bits.iter().zip(key.iter().cycle()).map(|(&b, &k)| b ^ k).collect()
}

/// Runs one entanglement-based session.
pub fn run_e91_session(config: &SessionConfig) -> Result<SessionOutcome, ProtocolError> {
    config.validate()?;
    let seeds = config.seeds();
    let mut alice_rng = seeds.alice_rng();
    let mut bob_rng = seeds.bob_rng();
    let mut eve_rng = seeds.eve_rng();
    let mut source_rng = seeds.channel_rng();
    let n = config.n;

    let mut eve = Eavesdropper::new(config.attack);
    let mut settings_a = Vec::with_capacity(n);
    let mut settings_b = Vec::with_capacity(n);
    let mut bits_a = Vec::with_capacity(n);
    let mut bits_b = Vec::with_capacity(n);
    for p in 0..n {
        let i: u8 = alice_rng.random_range(1..=3);
        let j: u8 = bob_rng.random_range(1..=3);
        let tamper = eve.tamper_pair(p, &mut eve_rng);
        let noise = config.channel.sample(&mut source_rng);
        let (a, b) = pair_outcome(
            ALICE_ANGLES[usize::from(i - 1)],
            BOB_ANGLES[usize::from(j - 1)],
            config.source,
            tamper,
            noise,
            &mut source_rng,
        );
        settings_a.push(i);
        settings_b.push(j);
        bits_a.push(a.as_bit());
        bits_b.push(b.as_bit());
    }
    // Parallel analyzers anticorrelate, so Bob flips his raw bits.
    let flipped_b: Vec<bool> = bits_b.iter().map(|b| !b).collect();

    let parallel: Vec<usize> = (0..n)
        .filter(|&p| KEY_SETTINGS.contains(&(settings_a[p], settings_b[p])))
        .collect();
    let errors = parallel.iter().filter(|&&p| bits_a[p] != flipped_b[p]).count();

    let mut transcript = Transcript::new();
    let mut outcome = SessionOutcome {
        variant: config.variant,
        aborted: None,
        sifted_key_alice: Vec::new(),
        sifted_key_bob: Vec::new(),
        sifted_positions: Vec::new(),
        qber_estimate: if parallel.is_empty() { 0.0 } else { errors as f64 / parallel.len() as f64 },
        sample_error_rate: None,
        sifted_fraction: parallel.len() as f64 / n as f64,
        transcript: Transcript::new(),
        eve_record: Default::default(),
        eve_guesses: None,
        leaked_bits: 0,
        chsh: None,
    };

    let verdict = e91_discussion(
        config,
        &settings_a,
        &settings_b,
        &bits_a,
        &flipped_b,
        &mut alice_rng,
        &mut transcript,
        &mut outcome,
    )?;
    if let Err(reason) = verdict {
        outcome.aborted = Some(reason);
        outcome.sifted_key_alice.clear();
        outcome.sifted_key_bob.clear();
        outcome.sifted_positions.clear();
    }
    outcome.leaked_bits = transcript.find(Party::Alice, MessageKind::ParityBit).count();
    outcome.eve_record = eve.into_record();
    outcome.transcript = transcript;
    Ok(outcome)
}

#[allow(clippy::too_many_arguments)]
fn e91_discussion(
    config: &SessionConfig,
    settings_a: &[u8],
    settings_b: &[u8],
    bits_a: &[bool],
    flipped_b: &[bool],
    rng: &mut rand_chacha::ChaCha8Rng,
    transcript: &mut Transcript,
    outcome: &mut SessionOutcome,
) -> Result<Result<(), AbortReason>, ProtocolError> {
    let reconciled = match reconcile(bits_a, flipped_b, config.parity_subsets, config.reconciliation, rng, transcript)? {
        Ok(r) => r,
        Err(reason) => return Ok(Err(reason)),
    };
    let masked_a = cyclic_mask(&encode_angles(settings_a), &reconciled.alice);
    let masked_b = cyclic_mask(&encode_angles(settings_b), &reconciled.bob);
    transcript.publish(Party::Alice, MessageKind::MaskedAngles, encode_bits(&masked_a));
    transcript.publish(Party::Bob, MessageKind::MaskedAngles, encode_bits(&masked_b));
    let b_seen_by_alice = decode_angles(&cyclic_mask(&masked_b, &reconciled.alice));
    let a_seen_by_bob = decode_angles(&cyclic_mask(&masked_a, &reconciled.bob));

    for p in 0..settings_a.len() {
        if KEY_SETTINGS.contains(&(settings_a[p], b_seen_by_alice[p])) {
            outcome.sifted_positions.push(p);
            outcome.sifted_key_alice.push(reconciled.alice[p]);
        }
        if KEY_SETTINGS.contains(&(a_seen_by_bob[p], settings_b[p])) {
            outcome.sifted_key_bob.push(reconciled.bob[p]);
        }
    }

    let chsh_positions: Vec<usize> = (0..settings_a.len())
        .filter(|&p| {
            CHSH_SETTINGS
                .iter()
                .any(|&(i, j, _)| settings_a[p] == i && b_seen_by_alice[p] == j)
        })
        .collect();
    let outcomes_a: Vec<bool> = chsh_positions.iter().map(|&p| bits_a[p]).collect();
    let outcomes_b: Vec<bool> = chsh_positions.iter().map(|&p| !flipped_b[p]).collect();
    transcript.publish(Party::Alice, MessageKind::ChshPositions, encode_positions(&chsh_positions));
    transcript.publish(Party::Alice, MessageKind::ChshOutcomes, encode_bits(&outcomes_a));
    transcript.publish(Party::Bob, MessageKind::ChshOutcomes, encode_bits(&outcomes_b));

    let records: Vec<CorrelationRecord> = chsh_positions
        .iter()
        .zip(outcomes_a.iter().zip(&outcomes_b))
        .map(|(&p, (&a, &b))| CorrelationRecord {
            alice_angle_index: settings_a[p],
            bob_angle_index: b_seen_by_alice[p],
            alice_outcome: Spin::from_plus(a),
            bob_outcome: Spin::from_plus(b),
        })
        .collect();
    let summary = match chsh_with_error(&records) {
        Ok(s) => s,
        Err(ProtocolError::MissingGroup(alice, bob)) => {
            return Ok(Err(AbortReason::ChshMissingGroup { alice, bob }));
        }
        Err(e) => return Err(e),
    };
    let threshold = CHSH_MIN_THRESHOLD.max(CHSH_SIGMAS * summary.sigma);
    let s = summary.s;
    outcome.chsh = Some(summary);
    if (s - QUANTUM_S).abs() > threshold {
        return Ok(Err(AbortReason::ChshViolationTooSmall { s }));
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AttackStrategy;
    use crate::channel::{decode_bits, PauliChannelParams};
    use crate::protocol::{ReconciliationMode, Variant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config() -> SessionConfig {
        SessionConfig {
            n: 20_000,
            k: 1,
            variant: Variant::RandomizedE91,
            reconciliation: ReconciliationMode::Oracle,
            seed: 5,
            ..SessionConfig::default()
        }
    }

    #[test]
    fn parallel_settings_anticorrelate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (i, j) in KEY_SETTINGS {
            for _ in 0..2000 {
                let r = generate_singlet_outcomes(i, j, &mut rng).unwrap();
                assert_ne!(r.alice_outcome, r.bob_outcome);
            }
        }
        assert!(generate_singlet_outcomes(0, 1, &mut rng).is_err());
        assert!(generate_singlet_outcomes(1, 4, &mut rng).is_err());
    }

    #[test]
    fn correlation_examples() {
        let rec = |a, b| CorrelationRecord {
            alice_angle_index: 1,
            bob_angle_index: 1,
            alice_outcome: a,
            bob_outcome: b,
        };
        assert_eq!(correlation_coefficient(&[rec(Spin::Up, Spin::Down); 5]).unwrap(), -1.0);
        let balanced = [
            rec(Spin::Up, Spin::Up),
            rec(Spin::Down, Spin::Down),
            rec(Spin::Up, Spin::Down),
            rec(Spin::Down, Spin::Up),
        ];
        assert_eq!(correlation_coefficient(&balanced).unwrap(), 0.0);
        assert!(correlation_coefficient(&[]).is_err());
        assert!(matches!(chsh_s(&balanced), Err(ProtocolError::MissingGroup(1, 3))));
    }

    #[test]
    fn singlet_formula_values() {
        assert!((singlet_correlation(1, 1).unwrap() + FRAC_PI_4.cos()).abs() < 1e-12);
        assert!((singlet_correlation(1, 3).unwrap() - FRAC_PI_4.cos()).abs() < 1e-12);
        let s = singlet_correlation(1, 1).unwrap() - singlet_correlation(1, 3).unwrap()
            + singlet_correlation(3, 1).unwrap()
            + singlet_correlation(3, 3).unwrap();
        assert!((s - QUANTUM_S).abs() < 1e-12);
    }

    #[test]
    fn angle_codec_round_trip() {
        let idx = [1u8, 2, 3, 3, 1, 2];
        assert_eq!(decode_angles(&encode_angles(&idx)), idx);
        let key = [true, false, true];
        assert_eq!(cyclic_mask(&cyclic_mask(&encode_angles(&idx), &key), &key), encode_angles(&idx));
    }

    #[test]
    fn ideal_session_passes() {
        let out = run_e91_session(&config()).unwrap();
        assert!(out.aborted.is_none(), "{:?}", out.aborted);
        assert_eq!(out.sifted_key_alice, out.sifted_key_bob);
        assert_eq!(out.qber_estimate, 0.0);
        let s = out.chsh.unwrap().s;
        assert!((s - QUANTUM_S).abs() < 0.2, "{s}");
    }

    #[test]
    fn masked_angles_differ_from_raw() {
        let cfg = config();
        let out = run_e91_session(&cfg).unwrap();
        let mut rng = cfg.seeds().alice_rng();
        let raw: Vec<u8> = (0..cfg.n).map(|_| rng.random_range(1..=3)).collect();
        let published = out.transcript.first(Party::Alice, MessageKind::MaskedAngles).unwrap();
        assert_ne!(decode_bits(&published.payload).unwrap(), encode_angles(&raw));
    }

    #[test]
    fn local_source_is_caught() {
        let cfg = SessionConfig {
            source: PairSource::LocalDeterministic,
            ..config()
        };
        let out = run_e91_session(&cfg).unwrap();
        assert!(matches!(out.aborted, Some(AbortReason::ChshViolationTooSmall { .. })));
        let s = out.chsh.unwrap().s;
        assert!((s + 2.0).abs() < 0.15, "{s}");
    }

    #[test]
    fn interception_is_caught() {
        let cfg = SessionConfig {
            attack: AttackStrategy::intercept_resend(),
            ..config()
        };
        let out = run_e91_session(&cfg).unwrap();
        assert!(out.is_aborted());
        let summary = out.chsh.unwrap();
        assert!(summary.s.abs() < 2.0 * std::f64::consts::SQRT_2 - 5.0 * summary.sigma);
    }

    #[test]
    fn pauli_noise_breaks_anticorrelation() {
        let cfg = SessionConfig {
            channel: PauliChannelParams::new(0.0, 0.2, 0.0).unwrap(),
            ..config()
        };
        let out = run_e91_session(&cfg).unwrap();
        // Y reverses Bob's axis, so every affected parallel pair agrees.
        assert!((out.qber_estimate - 0.2).abs() < 0.03, "{}", out.qber_estimate);
    }
}
