use std::f64::consts::FRAC_PI_4;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AdversaryError;
use crate::channel::{Pauli, PauliChannelParams};
use crate::qmath::{average_cloning_efficiency, make_bb84_state, measure, Basis, PureState};

fn full_interception() -> f64 {
    1.0
}

/// What Eve does to the quantum channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttackStrategy {
    #[default]
    None,
    /// Measure in a random BB84 basis and resend the collapsed state.
    InterceptResend {
        #[serde(default = "full_interception")]
        fraction: f64,
    },
    /// Probabilistic cloning: succeeds with the average cloning efficiency,
    /// otherwise the qubit is lost to Eve and she resends a random BB84 state.
    ProbabilisticCloneResend {
        #[serde(default = "full_interception")]
        fraction: f64,
    },
    /// Eve applies a Pauli channel of her choosing and remembers each Pauli.
    PauliTamper { params: PauliChannelParams },
}

impl AttackStrategy {
    pub fn validate(&self) -> Result<(), AdversaryError> {
        match *self {
            AttackStrategy::InterceptResend { fraction } | AttackStrategy::ProbabilisticCloneResend { fraction }
                if !(0.0..=1.0).contains(&fraction) =>
            {
                Err(AdversaryError::InvalidFraction(fraction))
            }
            _ => Ok(()),
        }
    }

    pub fn intercept_resend() -> Self {
        AttackStrategy::InterceptResend { fraction: 1.0 }
    }

    pub fn clone_resend() -> Self {
        AttackStrategy::ProbabilisticCloneResend { fraction: 1.0 }
    }

    fn fraction(&self) -> f64 {
        match *self {
            AttackStrategy::None => 0.0,
            AttackStrategy::InterceptResend { fraction } => fraction,
            AttackStrategy::ProbabilisticCloneResend { fraction } => fraction,
            AttackStrategy::PauliTamper { .. } => 1.0,
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackStrategy::None => write!(f, "none"),
            AttackStrategy::InterceptResend { fraction } => write!(f, "intercept-resend:{fraction}"),
            AttackStrategy::ProbabilisticCloneResend { fraction } => {
                write!(f, "probabilistic-clone-resend:{fraction}")
            }
            AttackStrategy::PauliTamper { params } => write!(
                f,
                "pauli-tamper:{}/{}/{}",
                params.p_x(),
                params.p_y(),
                params.p_z()
            ),
        }
    }
}

/// One qubit Eve touched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveEntry {
    pub position: usize,
    pub action: EveAction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveAction {
    /// Measured in `basis`, observed `bit`, resent the eigenstate.
    Measured { basis: Basis, bit: bool },
    /// Clone succeeded; Eve holds a perfect copy until the public discussion.
    Cloned { held: PureState },
    /// Clone failed; Eve resent a random BB84 state.
    CloneFailed { resent_basis: Basis, resent_bit: bool },
    /// Pauli applied to the qubit.
    Pauli(Pauli),
    /// Bob's half of an entangled pair measured along `angle`, spin `plus`.
    SpinMeasured { angle: f64, plus: bool },
    /// Bob's half of a pair replaced by a spin polarized along `angle`.
    SpinReplaced { angle: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EveRecord {
    pub entries: Vec<EveEntry>,
    pub clone_success_count: usize,
}

/// Counts exported alongside each session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveSummary {
    pub intercepted: usize,
    pub clone_successes: usize,
    pub clone_failures: usize,
}

impl EveRecord {
    pub fn intercepted(&self) -> usize {
        self.entries.len()
    }

    pub fn entry_at(&self, position: usize) -> Option<&EveEntry> {
        self.entries
            .binary_search_by_key(&position, |e| e.position)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn summary(&self) -> EveSummary {
        let failures = self
            .entries
            .iter()
            .filter(|e| matches!(e.action, EveAction::CloneFailed { .. }))
            .count();
        EveSummary {
            intercepted: self.entries.len(),
            clone_successes: self.clone_success_count,
            clone_failures: failures,
        }
    }
}

/// Measure-and-resend in a uniformly random BB84 basis.
pub fn intercept_resend<R: Rng + ?Sized>(state: &PureState, rng: &mut R) -> (PureState, bool, Basis) {
    let basis = Basis::from_bit(rng.random_bool(0.5));
    let (bit, collapsed) = measure(state, basis, rng);
    (collapsed, bit, basis)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloneOutcome {
    pub resent: PureState,
    pub success: bool,
    /// Eve's bit guess when it is fixed at interception time; a successful
    /// clone defers the guess until the bases are discussed.
    pub guess: Option<bool>,
    pub resent_basis: Basis,
}

/// Probabilistic clone-and-resend on one BB84 qubit.
pub fn probabilistic_clone_resend<R: Rng + ?Sized>(state: &PureState, rng: &mut R) -> CloneOutcome {
    if rng.random_bool(average_cloning_efficiency()) {
        return CloneOutcome {
            resent: *state,
            success: true,
            guess: None,
            resent_basis: Basis::Z,
        };
    }
    let basis = Basis::from_bit(rng.random_bool(0.5));
    let bit = rng.random_bool(0.5);
    CloneOutcome {
        resent: make_bb84_state(basis, bit),
        success: false,
        guess: Some(bit),
        resent_basis: basis,
    }
}

/// Analyzer angles Eve picks from when intercepting entangled pairs: the
/// union of both parties' analyzer settings.
pub const EVE_ANALYZER_ANGLES: [f64; 4] = [0.0, FRAC_PI_4, 2.0 * FRAC_PI_4, 3.0 * FRAC_PI_4];

/// What Eve did to Bob's half of an entangled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairTamper {
    Untouched,
    /// Bob's particle measured along `angle` with result `plus`; the pair is
    /// now a product of opposite spins along that axis.
    Measured { angle: f64, plus: bool },
    /// Bob's particle swapped for a spin polarized along `angle`; Alice's
    /// particle is left maximally mixed.
    Replaced { angle: f64 },
    /// Pauli applied to Bob's particle, the pair stays entangled.
    Pauli(Pauli),
}

/// Stateful attacker for one session.
#[derive(Debug, Clone)]
pub struct Eavesdropper {
    strategy: AttackStrategy,
    record: EveRecord,
}

impl Eavesdropper {
    pub fn new(strategy: AttackStrategy) -> Self {
        Self {
            strategy,
            record: EveRecord::default(),
        }
    }

    pub fn strategy(&self) -> &AttackStrategy {
        &self.strategy
    }

    pub fn record(&self) -> &EveRecord {
        &self.record
    }

    pub fn into_record(self) -> EveRecord {
        self.record
    }

    fn intercepts<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        match self.strategy.fraction() {
            f if f >= 1.0 => true,
            f if f <= 0.0 => false,
            f => rng.random_bool(f),
        }
    }

    fn log(&mut self, position: usize, action: EveAction) {
        self.record.entries.push(EveEntry { position, action });
    }

    /// Acts on the qubit at `position` and returns what continues towards Bob.
    /// Positions must be visited in increasing order.
    pub fn tamper<R: Rng + ?Sized>(&mut self, position: usize, state: &PureState, rng: &mut R) -> PureState {
        if matches!(self.strategy, AttackStrategy::None) || !self.intercepts(rng) {
            return *state;
        }
        match self.strategy {
            AttackStrategy::None => *state,
            AttackStrategy::InterceptResend { .. } => {
                let (resent, bit, basis) = intercept_resend(state, rng);
                self.log(position, EveAction::Measured { basis, bit });
                resent
            }
            AttackStrategy::ProbabilisticCloneResend { .. } => {
                let outcome = probabilistic_clone_resend(state, rng);
                if outcome.success {
                    self.record.clone_success_count += 1;
                    self.log(position, EveAction::Cloned { held: *state });
                } else {
                    self.log(
                        position,
                        EveAction::CloneFailed {
                            resent_basis: outcome.resent_basis,
                            resent_bit: outcome.guess.unwrap_or(false),
                        },
                    );
                }
                outcome.resent
            }
            AttackStrategy::PauliTamper { params } => {
                let pauli = params.sample(rng);
                self.log(position, EveAction::Pauli(pauli));
                pauli.apply(state)
            }
        }
    }

    /// Acts on Bob's half of entangled pair `position`.
    pub fn tamper_pair<R: Rng + ?Sized>(&mut self, position: usize, rng: &mut R) -> PairTamper {
        if matches!(self.strategy, AttackStrategy::None) || !self.intercepts(rng) {
            return PairTamper::Untouched;
        }
        let random_angle = |rng: &mut R| EVE_ANALYZER_ANGLES[rng.random_range(0..EVE_ANALYZER_ANGLES.len())];
        match self.strategy {
            AttackStrategy::None => PairTamper::Untouched,
            AttackStrategy::InterceptResend { .. } => {
                let angle = random_angle(rng);
                // Singlet marginals are uniform whatever the axis.
                let plus = rng.random_bool(0.5);
                self.log(position, EveAction::SpinMeasured { angle, plus });
                PairTamper::Measured { angle, plus }
            }
            AttackStrategy::ProbabilisticCloneResend { .. } => {
                if rng.random_bool(average_cloning_efficiency()) {
                    self.record.clone_success_count += 1;
                    return PairTamper::Untouched;
                }
                let axis = random_angle(rng);
                let angle = if rng.random_bool(0.5) { axis } else { axis + std::f64::consts::PI };
                self.log(position, EveAction::SpinReplaced { angle });
                PairTamper::Replaced { angle }
            }
            AttackStrategy::PauliTamper { params } => {
                let pauli = params.sample(rng);
                self.log(position, EveAction::Pauli(pauli));
                PairTamper::Pauli(pauli)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn z_measurement_of_zero_resends_zero() {
        // Find a draw where Eve picks Z, then check the outcome.
        for seed in 0..64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (resent, bit, basis) = intercept_resend(&PureState::ZERO, &mut rng);
            if basis == Basis::Z {
                assert!(!bit);
                assert_eq!(resent, PureState::ZERO);
                return;
            }
        }
        panic!("no Z-basis draw in 64 seeds");
    }

    #[test]
    fn zero_fraction_leaves_qubits_alone() {
        let mut eve = Eavesdropper::new(AttackStrategy::InterceptResend { fraction: 0.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..1000 {
            assert_eq!(eve.tamper(i, &PureState::PLUS, &mut rng), PureState::PLUS);
        }
        assert_eq!(eve.record().intercepted(), 0);
    }

    #[test]
    fn clone_success_rate() {
        let mut eve = Eavesdropper::new(AttackStrategy::clone_resend());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        for i in 0..n {
            eve.tamper(i, &PureState::MINUS, &mut rng);
        }
        let rate = eve.record().clone_success_count as f64 / n as f64;
        assert!((rate - 0.6679).abs() < 0.005, "rate {rate}");
        assert_eq!(eve.record().intercepted(), n);
        let s = eve.record().summary();
        assert_eq!(s.clone_successes + s.clone_failures, n);
    }

    #[test]
    fn fraction_validation() {
        assert!(AttackStrategy::InterceptResend { fraction: 1.5 }.validate().is_err());
        assert!(AttackStrategy::clone_resend().validate().is_ok());
    }

    #[test]
    fn strategies_parse_from_toml() {
        #[derive(Deserialize)]
        struct Wrap {
            attack: AttackStrategy,
        }
        let w: Wrap = toml::from_str("attack = { kind = \"intercept-resend\" }").unwrap();
        assert_eq!(w.attack, AttackStrategy::intercept_resend());
        let w: Wrap =
            toml::from_str("attack = { kind = \"pauli-tamper\", params = { p_z = 0.25 } }").unwrap();
        let AttackStrategy::PauliTamper { params } = w.attack else {
            panic!("wrong variant")
        };
        assert_eq!(params.p_z(), 0.25);
        assert!(toml::from_str::<Wrap>("attack = { kind = \"pauli-tamper\", params = { p_z = 2.0 } }").is_err());
    }
}
