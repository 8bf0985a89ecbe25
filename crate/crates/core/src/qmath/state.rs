//! Qubit states, density operators, POVMs and measurement sampling.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{Matrix2, Matrix4, ONE, ZERO};
use super::{QmathError, ALGEBRAIC_TOL};

/// Normalized single-qubit pure state `amp0|0⟩ + amp1|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amp0: Complex64,
    amp1: Complex64,
}

impl PureState {
    pub const ZERO: Self = Self { amp0: ONE, amp1: ZERO };
    pub const ONE: Self = Self { amp0: ZERO, amp1: ONE };
    pub const PLUS: Self = Self {
        amp0: Complex64::new(FRAC_1_SQRT_2, 0.0),
        amp1: Complex64::new(FRAC_1_SQRT_2, 0.0),
    };
    pub const MINUS: Self = Self {
        amp0: Complex64::new(FRAC_1_SQRT_2, 0.0),
        amp1: Complex64::new(-FRAC_1_SQRT_2, 0.0),
    };

    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self, QmathError> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QmathError::NotNormalized { norm });
        }
        Ok(Self { amp0, amp1 })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amp0: Complex64, amp1: Complex64) -> Result<Self, QmathError> {
        let norm = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(QmathError::NotNormalized { norm });
        }
        Ok(Self {
            amp0: amp0 / norm,
            amp1: amp1 / norm,
        })
    }

    pub(crate) fn from_vector_unchecked(v: [Complex64; 2]) -> Self {
        Self { amp0: v[0], amp1: v[1] }
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    pub fn as_vector(&self) -> [Complex64; 2] {
        [self.amp0, self.amp1]
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1
    }

    pub fn projector(&self) -> Matrix2 {
        Matrix2::outer(self.as_vector(), self.as_vector())
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix(self.projector())
    }

    /// Applies a unitary; the result is renormalized to absorb rounding.
    pub fn evolve(&self, unitary: &Matrix2) -> PureState {
        let v = unitary.apply(self.as_vector());
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        Self::from_vector_unchecked([v[0] / norm, v[1] / norm])
    }

    /// `|self⟩ ⊗ |other⟩`
    pub fn tensor(&self, other: &PureState) -> [Complex64; 4] {
        [
            self.amp0 * other.amp0,
            self.amp0 * other.amp1,
            self.amp1 * other.amp0,
            self.amp1 * other.amp1,
        ]
    }

    /// True when the two states agree up to a global phase.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        (1.0 - self.inner(other).norm()).abs() <= tol
    }
}

/// BB84 preparation/measurement axis. Encoded on the wire as 0 ↦ Z, 1 ↦ X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::X
        } else {
            Basis::Z
        }
    }

    pub fn as_bit(self) -> bool {
        matches!(self, Basis::X)
    }

    pub fn other(self) -> Self {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }

    /// Eigenstates for outcome 0 and outcome 1.
    pub fn eigenstates(self) -> [PureState; 2] {
        match self {
            Basis::Z => [PureState::ZERO, PureState::ONE],
            Basis::X => [PureState::PLUS, PureState::MINUS],
        }
    }

    pub fn measurement(self) -> MeasurementBasis {
        MeasurementBasis(self.eigenstates())
    }
}

/// The BB84 state encoding `bit` in `basis`.
pub fn make_bb84_state(basis: Basis, bit: bool) -> PureState {
    basis.eigenstates()[usize::from(bit)]
}

/// Orthonormal pair defining a projective qubit measurement; outcome `b`
/// corresponds to the `b`-th state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis([PureState; 2]);

impl MeasurementBasis {
    pub fn new(outcome0: PureState, outcome1: PureState) -> Result<Self, QmathError> {
        let overlap = outcome0.inner(&outcome1).norm();
        if overlap > ALGEBRAIC_TOL {
            return Err(QmathError::NotOrthogonal { overlap });
        }
        Ok(Self([outcome0, outcome1]))
    }

    pub fn states(&self) -> [PureState; 2] {
        self.0
    }

    pub fn outcome_probability(&self, state: &PureState, outcome: bool) -> f64 {
        self.0[usize::from(outcome)].inner(state).norm_sqr().clamp(0.0, 1.0)
    }

    /// Samples an outcome by the Born rule and returns the post-measurement state.
    pub fn measure<R: Rng + ?Sized>(&self, state: &PureState, rng: &mut R) -> (bool, PureState) {
        let p0 = self.outcome_probability(state, false);
        let bit = rng.random::<f64>() >= p0;
        (bit, self.0[usize::from(bit)])
    }
}

/// Measures `state` in a BB84 basis, collapsing it onto the observed eigenstate.
pub fn measure<R: Rng + ?Sized>(state: &PureState, basis: Basis, rng: &mut R) -> (bool, PureState) {
    basis.measurement().measure(state, rng)
}

/// Hermitian, unit-trace, positive semi-definite 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix2);

impl DensityMatrix {
    pub fn new(entries: Matrix2) -> Result<Self, QmathError> {
        let herm = entries.hermiticity_defect();
        if herm > ALGEBRAIC_TOL {
            return Err(QmathError::NotHermitian { defect: herm });
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > ALGEBRAIC_TOL || trace.im.abs() > ALGEBRAIC_TOL {
            return Err(QmathError::BadTrace { trace: trace.re });
        }
        let [min_eig, _] = entries.eigenvalues();
        if min_eig < -ALGEBRAIC_TOL {
            return Err(QmathError::NotPositive { eigenvalue: min_eig });
        }
        Ok(Self(entries))
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix2::from_real([[0.5, 0.0], [0.0, 0.5]]))
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0.get(row, col)
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.0.eigenvalues()
    }
}

/// Ordered list of PSD operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<Matrix2>,
}

impl Povm {
    pub fn new(elements: Vec<Matrix2>) -> Result<Self, QmathError> {
        if elements.is_empty() {
            return Err(QmathError::EmptyPovm);
        }
        for e in &elements {
            check_psd(e)?;
        }
        let sum = elements.iter().fold(Matrix2::zero(), |acc, e| acc + *e);
        let defect = sum.max_abs_diff(&Matrix2::identity());
        if defect > ALGEBRAIC_TOL {
            return Err(QmathError::IncompletePovm { defect });
        }
        Ok(Self { elements })
    }

    /// Projective measurement onto an orthonormal pair.
    pub fn projective(basis: &MeasurementBasis) -> Self {
        let [a, b] = basis.states();
        Self {
            elements: vec![a.projector(), b.projector()],
        }
    }

    pub fn elements(&self) -> &[Matrix2] {
        &self.elements
    }

    /// Outcome distribution `Tr(ρ E_x)` for every element.
    pub fn outcome_distribution(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| trace_product(rho.matrix(), e).clamp(0.0, 1.0))
            .collect()
    }
}

fn check_psd(m: &Matrix2) -> Result<(), QmathError> {
    let herm = m.hermiticity_defect();
    if herm > ALGEBRAIC_TOL {
        return Err(QmathError::NotHermitian { defect: herm });
    }
    let [min_eig, _] = m.eigenvalues();
    if min_eig < -ALGEBRAIC_TOL {
        return Err(QmathError::NotPositive { eigenvalue: min_eig });
    }
    Ok(())
}

fn trace_product(a: &Matrix2, b: &Matrix2) -> f64 {
    (*a * *b).trace().re
}

/// A member of a quantum ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl EnsembleState {
    fn matrix(&self) -> Matrix2 {
        match self {
            EnsembleState::Pure(psi) => psi.projector(),
            EnsembleState::Mixed(rho) => *rho.matrix(),
        }
    }
}

/// `{(P_j, state_j)}` with nonnegative probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, EnsembleState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, EnsembleState)>) -> Result<Self, QmathError> {
        if members.is_empty() {
            return Err(QmathError::EmptyDistribution);
        }
        if let Some(&(p, _)) = members.iter().find(|(p, _)| !p.is_finite() || *p < 0.0) {
            return Err(QmathError::NegativeProbability { value: p });
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QmathError::NotNormalizedDistribution { total });
        }
        Ok(Self { members })
    }

    pub fn pure(members: impl IntoIterator<Item = (f64, PureState)>) -> Result<Self, QmathError> {
        Self::new(
            members
                .into_iter()
                .map(|(p, s)| (p, EnsembleState::Pure(s)))
                .collect(),
        )
    }

    pub fn members(&self) -> &[(f64, EnsembleState)] {
        &self.members
    }
}

/// `ρ = Σ_j P_j ρ_j`
pub fn density_from_ensemble(ensemble: &Ensemble) -> Result<DensityMatrix, QmathError> {
    let rho = ensemble
        .members()
        .iter()
        .fold(Matrix2::zero(), |acc, (p, s)| {
            acc + s.matrix().scale(Complex64::new(*p, 0.0))
        });
    DensityMatrix::new(rho.hermitian_part())
}

/// `Tr(ρ E)` for a PSD effect `E`, clamped to `[0, 1]`.
pub fn born_probability(rho: &DensityMatrix, element: &Matrix2) -> Result<f64, QmathError> {
    check_psd(element)?;
    let p = trace_product(rho.matrix(), element);
    if !(-ALGEBRAIC_TOL..=1.0 + ALGEBRAIC_TOL).contains(&p) {
        return Err(QmathError::ProbabilityOutOfRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Two-qubit density matrix over A⊗B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDensityMatrix(Matrix4);

impl JointDensityMatrix {
    pub fn new(entries: Matrix4) -> Result<Self, QmathError> {
        let herm = entries.hermiticity_defect();
        if herm > ALGEBRAIC_TOL {
            return Err(QmathError::NotHermitian { defect: herm });
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > ALGEBRAIC_TOL || trace.im.abs() > ALGEBRAIC_TOL {
            return Err(QmathError::BadTrace { trace: trace.re });
        }
        let min_eig = entries.eigenvalues()[0];
        if min_eig < -ALGEBRAIC_TOL {
            return Err(QmathError::NotPositive { eigenvalue: min_eig });
        }
        Ok(Self(entries))
    }

    /// Projector onto a normalized two-qubit vector.
    pub fn from_pure(amplitudes: [Complex64; 4]) -> Result<Self, QmathError> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QmathError::NotNormalized { norm });
        }
        Self::new(Matrix4::outer(amplitudes, amplitudes))
    }

    /// `(|01⟩ − |10⟩)/√2`
    pub fn singlet() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self(Matrix4::outer([ZERO, s, -s, ZERO], [ZERO, s, -s, ZERO]))
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.0
    }
}

/// Reduced state of subsystem A: `ρ_A[a][a'] = Σ_b ρ[2a+b][2a'+b]`.
pub fn partial_trace_b(joint: &JointDensityMatrix) -> Result<DensityMatrix, QmathError> {
    let m = &joint.matrix().0;
    let mut reduced = Matrix2::zero();
    for a in 0..2 {
        for a2 in 0..2 {
            reduced.0[a][a2] = (0..2).map(|b| m[2 * a + b][2 * a2 + b]).sum();
        }
    }
    DensityMatrix::new(reduced)
}
