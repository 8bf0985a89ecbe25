use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::attack::{EveAction, EveRecord};
use super::AdversaryError;
use crate::channel::{decode_bits, decode_positions, MessageKind, Party, Transcript};
use crate::qmath::{helstrom_measurement, make_bb84_state, mutual_information, Basis, MeasurementBasis};
use crate::protocol::SessionOutcome;

const ANALYSIS_STREAM: u64 = 0x5EED_0F00_E7E0_0005;

/// What Eve can read off the public discussion about each raw position.
enum BasisKnowledge {
    /// Alice's bases were announced in the clear.
    Plain(Vec<bool>),
    /// Only `A ⊕ K` is known, at the positions that survived estimation.
    Masked(Vec<Option<bool>>),
}

fn basis_knowledge(transcript: &Transcript, n: usize) -> Result<BasisKnowledge, AdversaryError> {
    if let Some(r) = transcript.first(Party::Alice, MessageKind::Bases) {
        return Ok(BasisKnowledge::Plain(decode_bits(&r.payload)?));
    }
    let masked = transcript
        .first(Party::Alice, MessageKind::MaskedBases)
        .ok_or(AdversaryError::MissingAnnouncement("basis list"))?;
    let masked = decode_bits(&masked.payload)?;
    let sampled = match transcript.first(Party::Alice, MessageKind::SamplePositions) {
        Some(r) => decode_positions(&r.payload)?,
        None => Vec::new(),
    };
    let mut removed = vec![false; n];
    for p in sampled {
        if p < n {
            removed[p] = true;
        }
    }
    let mut by_position = vec![None; n];
    let survivors = (0..n).filter(|&i| !removed[i]);
    for (pos, bit) in survivors.zip(masked) {
        by_position[pos] = Some(bit);
    }
    Ok(BasisKnowledge::Masked(by_position))
}

/// Eve's best guess of Alice's raw bit at every position, using her record
/// and everything published on the transcript.
///
/// Held clones are measured in Alice's announced basis when the bases are
/// public. Under masking Eve only knows `A ⊕ K`, which narrows each clone to
/// two non-orthogonal candidates; she applies the minimum-error measurement
/// between them. Positions she never touched get a coin flip.
pub fn eve_bit_guesses(
    record: &EveRecord,
    transcript: &Transcript,
    n: usize,
    eve_seed: u64,
) -> Result<Vec<bool>, AdversaryError> {
    let knowledge = basis_knowledge(transcript, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(eve_seed ^ ANALYSIS_STREAM);
    // Index by the masked value: candidates for key 0 and key 1.
    let helstrom: [MeasurementBasis; 2] = [false, true].map(|masked| {
        let key0 = make_bb84_state(Basis::from_bit(masked), false);
        let key1 = make_bb84_state(Basis::from_bit(!masked), true);
        helstrom_measurement(&key0, &key1)
    });

    let mut guesses: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    for entry in &record.entries {
        let Some(slot) = guesses.get_mut(entry.position) else {
            continue;
        };
        match entry.action {
            EveAction::Measured { bit, .. } => *slot = bit,
            EveAction::CloneFailed { resent_bit, .. } => *slot = resent_bit,
            EveAction::Cloned { held } => {
                *slot = match &knowledge {
                    BasisKnowledge::Plain(bases) => {
                        let basis = bases
                            .get(entry.position)
                            .map(|&b| Basis::from_bit(b))
                            .unwrap_or(Basis::Z);
                        basis.measurement().measure(&held, &mut rng).0
                    }
                    BasisKnowledge::Masked(masked) => match masked[entry.position] {
                        Some(m) => helstrom[usize::from(m)].measure(&held, &mut rng).0,
                        None => Basis::from_bit(rng.random_bool(0.5))
                            .measurement()
                            .measure(&held, &mut rng)
                            .0,
                    },
                };
            }
            EveAction::Pauli(_) | EveAction::SpinMeasured { .. } | EveAction::SpinReplaced { .. } => {}
        }
    }
    Ok(guesses)
}

/// Joint counts of (true key bit, Eve's guess).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessTally {
    /// `counts[key][guess]`
    pub counts: [[u64; 2]; 2],
}

impl GuessTally {
    pub fn from_pairs(key: &[bool], guesses: &[bool]) -> Self {
        let mut tally = Self::default();
        for (&k, &g) in key.iter().zip(guesses) {
            tally.add(k, g);
        }
        tally
    }

    pub fn add(&mut self, key: bool, guess: bool) {
        self.counts[usize::from(key)][usize::from(guess)] += 1;
    }

    pub fn merge(&mut self, other: &GuessTally) {
        for k in 0..2 {
            for g in 0..2 {
                self.counts[k][g] += other.counts[k][g];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Fraction of positions where Eve guessed right.
    pub fn agreement(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (self.counts[0][0] + self.counts[1][1]) as f64 / total as f64
    }

    /// Plug-in mutual information (bits per key bit) between key and guess.
    pub fn mutual_information(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let row = |k: usize| -> Option<[f64; 2]> {
            let n = (self.counts[k][0] + self.counts[k][1]) as f64;
            (n > 0.0).then(|| [self.counts[k][0] as f64 / n, self.counts[k][1] as f64 / n])
        };
        let (Some(p0), Some(p1)) = (row(0), row(1)) else {
            // A constant key carries no information to share.
            return 0.0;
        };
        let pi0 = (self.counts[0][0] + self.counts[0][1]) as f64 / total as f64;
        mutual_information(&p0, &p1, pi0, 1.0 - pi0).unwrap_or(0.0)
    }
}

/// Tally for one completed session; `None` when it aborted or carries no
/// guesses.
pub fn session_eve_tally(outcome: &SessionOutcome) -> Option<GuessTally> {
    if outcome.aborted.is_some() {
        return None;
    }
    let guesses = outcome.eve_guesses.as_ref()?;
    Some(GuessTally::from_pairs(&outcome.sifted_key_alice, guesses))
}

/// Empirical mutual information between Eve's guesses and the sifted key,
/// pooled over all completed sessions.
pub fn eve_mutual_information_estimate(outcomes: &[SessionOutcome]) -> Result<f64, AdversaryError> {
    let mut pooled = GuessTally::default();
    let mut any = false;
    for tally in outcomes.iter().filter_map(session_eve_tally) {
        pooled.merge(&tally);
        any = true;
    }
    if !any {
        return Err(AdversaryError::NoCompletedSessions);
    }
    Ok(pooled.mutual_information())
}

fn check_key_length(n: usize) -> Result<(), AdversaryError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(AdversaryError::InvalidKeyLength(n));
    }
    Ok(())
}

/// Information about the sifted key that an unmasked basis announcement
/// hands Eve: `log₂ C(N, N/2) − log₂(C(N, N/2) / 2^(N/2)) = N/2`.
pub fn unmasked_information_gain(n: usize) -> Result<f64, AdversaryError> {
    check_key_length(n)?;
    Ok(n as f64 / 2.0)
}

/// Net gain once the basis lists are masked: `N / 2^((N/2)+1)`.
pub fn transcript_net_information_gain(n: usize) -> Result<f64, AdversaryError> {
    check_key_length(n)?;
    Ok(n as f64 / 2f64.powi((n / 2) as i32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(transcript_net_information_gain(2).unwrap(), 0.5);
        assert_eq!(transcript_net_information_gain(8).unwrap(), 0.25);
        assert!(transcript_net_information_gain(1).is_err());
        assert!(transcript_net_information_gain(7).is_err());
        assert!(unmasked_information_gain(0).is_err());
        for n in (4..200).step_by(2) {
            let a = transcript_net_information_gain(n).unwrap();
            let b = transcript_net_information_gain(n + 2).unwrap();
            assert!(b < a);
        }
        for n in (2..200).step_by(2) {
            assert!(transcript_net_information_gain(n).unwrap() < unmasked_information_gain(n).unwrap());
        }
    }

    #[test]
    fn tally_information() {
        let perfect = GuessTally { counts: [[500, 0], [0, 500]] };
        assert!((perfect.mutual_information() - 1.0).abs() < 1e-12);
        assert_eq!(perfect.agreement(), 1.0);
        let blind = GuessTally { counts: [[250, 250], [250, 250]] };
        assert!(blind.mutual_information().abs() < 1e-12);
        let constant = GuessTally { counts: [[10, 3], [0, 0]] };
        assert_eq!(constant.mutual_information(), 0.0);
        assert_eq!(GuessTally::default().mutual_information(), 0.0);
    }

    #[test]
    fn uniform_guessing_carries_no_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tally = GuessTally::default();
        for _ in 0..100_000 {
            tally.add(rng.random_bool(0.5), rng.random_bool(0.5));
        }
        assert!(tally.mutual_information() <= 0.01);
    }
}
