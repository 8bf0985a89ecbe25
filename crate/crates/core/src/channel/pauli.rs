use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ChannelError;
use crate::qmath::{Matrix2, PureState, ALGEBRAIC_TOL};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix2 {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => Matrix2::identity(),
            Pauli::X => Matrix2::new([[o, l], [l, o]]),
            Pauli::Y => Matrix2::new([[o, -i], [i, o]]),
            Pauli::Z => Matrix2::new([[l, o], [o, -l]]),
        }
    }

    pub fn apply(self, state: &PureState) -> PureState {
        match self {
            Pauli::I => *state,
            other => state.evolve(&other.matrix()),
        }
    }
}

/// Per-qubit probabilities of X, Y and Z errors; identity takes the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPauliParams")]
pub struct PauliChannelParams {
    p_x: f64,
    p_y: f64,
    p_z: f64,
}

#[derive(Deserialize)]
struct RawPauliParams {
    #[serde(default)]
    p_x: f64,
    #[serde(default)]
    p_y: f64,
    #[serde(default)]
    p_z: f64,
}

impl TryFrom<RawPauliParams> for PauliChannelParams {
    type Error = ChannelError;
    fn try_from(raw: RawPauliParams) -> Result<Self, Self::Error> {
        Self::new(raw.p_x, raw.p_y, raw.p_z)
    }
}

impl Default for PauliChannelParams {
    fn default() -> Self {
        Self::ideal()
    }
}

impl PauliChannelParams {
    pub fn new(p_x: f64, p_y: f64, p_z: f64) -> Result<Self, ChannelError> {
        let probs = [p_x, p_y, p_z];
        let valid = probs.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p))
            && p_x + p_y + p_z <= 1.0 + ALGEBRAIC_TOL;
        if !valid {
            return Err(ChannelError::InvalidPauliParams { p_x, p_y, p_z });
        }
        Ok(Self { p_x, p_y, p_z })
    }

    pub const fn ideal() -> Self {
        Self {
            p_x: 0.0,
            p_y: 0.0,
            p_z: 0.0,
        }
    }

    pub fn p_x(&self) -> f64 {
        self.p_x
    }

    pub fn p_y(&self) -> f64 {
        self.p_y
    }

    pub fn p_z(&self) -> f64 {
        self.p_z
    }

    pub fn p_i(&self) -> f64 {
        (1.0 - self.p_x - self.p_y - self.p_z).max(0.0)
    }

    pub fn is_ideal(&self) -> bool {
        self.p_x == 0.0 && self.p_y == 0.0 && self.p_z == 0.0
    }

    /// Draws one Pauli according to the channel probabilities.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        let u: f64 = rng.random();
        if u < self.p_x {
            Pauli::X
        } else if u < self.p_x + self.p_y {
            Pauli::Y
        } else if u < self.p_x + self.p_y + self.p_z {
            Pauli::Z
        } else {
            Pauli::I
        }
    }
}

/// Sends one qubit through the Pauli channel.
pub fn transmit<R: Rng + ?Sized>(state: &PureState, params: &PauliChannelParams, rng: &mut R) -> PureState {
    params.sample(rng).apply(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{measure, Basis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ideal_channel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ideal = PauliChannelParams::ideal();
        for s in [PureState::ZERO, PureState::ONE, PureState::PLUS, PureState::MINUS] {
            for _ in 0..100 {
                assert_eq!(transmit(&s, &ideal, &mut rng), s);
            }
        }
    }

    #[test]
    fn certain_bit_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let flip = PauliChannelParams::new(1.0, 0.0, 0.0).unwrap();
        let out = transmit(&PureState::ZERO, &flip, &mut rng);
        assert!(out.same_ray(&PureState::ONE, 1e-12));
    }

    #[test]
    fn phase_flips_show_up_in_x_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = PauliChannelParams::new(0.0, 0.0, 0.1).unwrap();
        let trials = 100_000;
        let flips = (0..trials)
            .filter(|_| {
                let out = transmit(&PureState::PLUS, &params, &mut rng);
                measure(&out, Basis::X, &mut rng).0
            })
            .count();
        let rate = flips as f64 / trials as f64;
        let sigma = (0.1 * 0.9 / trials as f64).sqrt();
        assert!((rate - 0.1).abs() <= 3.0 * sigma, "rate {rate}");
    }

    #[test]
    fn y_maps_bb84_states_onto_their_partners() {
        let out = Pauli::Y.apply(&PureState::PLUS);
        assert!(out.same_ray(&PureState::MINUS, 1e-12));
        let out = Pauli::Y.apply(&PureState::ZERO);
        assert!(out.same_ray(&PureState::ONE, 1e-12));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PauliChannelParams::new(0.6, 0.6, 0.0).is_err());
        assert!(PauliChannelParams::new(-0.1, 0.0, 0.0).is_err());
        assert!(PauliChannelParams::new(f64::NAN, 0.0, 0.0).is_err());
        let p = PauliChannelParams::new(0.1, 0.2, 0.3).unwrap();
        assert!((p.p_i() - 0.4).abs() < 1e-12);
    }
}
