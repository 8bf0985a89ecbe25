//! Distinguishability of quantum states and probabilistic-cloning bounds.

use super::linalg::Matrix2;
use super::state::{DensityMatrix, MeasurementBasis, PureState};

/// `K(ρ0, ρ1) = ½ Σ |λ_j|` over the eigenvalues of `ρ0 − ρ1` (trace distance).
pub fn kolmogorov_distance(rho0: &DensityMatrix, rho1: &DensityMatrix) -> f64 {
    let diff = *rho0.matrix() - *rho1.matrix();
    let [a, b] = diff.eigenvalues();
    (0.5 * (a.abs() + b.abs())).clamp(0.0, 1.0)
}

/// Quantum Bhattacharyya coefficient `Tr √(√ρ0 ρ1 √ρ0)`.
pub fn bhattacharyya(rho0: &DensityMatrix, rho1: &DensityMatrix) -> f64 {
    let root = rho0.matrix().sqrt_psd();
    let inner: Matrix2 = (root * *rho1.matrix() * root).hermitian_part();
    let coefficient: f64 = inner
        .eigenvalues()
        .iter()
        .map(|&x| if x <= super::linalg::EIGEN_FLOOR { 0.0 } else { x.sqrt() })
        .sum();
    coefficient.clamp(0.0, 1.0)
}

/// `⟨ψ1|ρ0|ψ1⟩`; only defined here with a pure second argument.
pub fn fidelity_pure(rho0: &DensityMatrix, psi1: &PureState) -> f64 {
    let v = psi1.as_vector();
    let rv = rho0.matrix().apply(v);
    (v[0].conj() * rv[0] + v[1].conj() * rv[1]).re.clamp(0.0, 1.0)
}

/// Upper bound on the success probability of a probabilistic cloner for the
/// pair `{ψ0, ψ1}`: `1 / (1 + |⟨ψ0|ψ1⟩|)`.
pub fn cloning_efficiency_bound(psi0: &PureState, psi1: &PureState) -> f64 {
    1.0 / (1.0 + psi0.inner(psi1).norm())
}

/// Mean cloning efficiency over pairs of BB84 input states, weighted by how
/// often each overlap class occurs: two orthogonal pairs at 1/8 each, four
/// non-orthogonal pairs at 1/8 each and four identical pairs at 1/16 each.
pub fn average_cloning_efficiency() -> f64 {
    let orthogonal = cloning_efficiency_bound(&PureState::ZERO, &PureState::ONE);
    let conjugate = cloning_efficiency_bound(&PureState::ZERO, &PureState::PLUS);
    let identical = cloning_efficiency_bound(&PureState::PLUS, &PureState::PLUS);
    2.0 * (1.0 / 8.0) * orthogonal + 4.0 * (1.0 / 8.0) * conjugate + 4.0 * (1.0 / 16.0) * identical
}

/// Minimum-error (Helstrom) measurement for two equiprobable pure states:
/// the eigenbasis of `|ψ0⟩⟨ψ0| − |ψ1⟩⟨ψ1|`, ordered so outcome 0 votes for `ψ0`.
pub fn helstrom_measurement(psi0: &PureState, psi1: &PureState) -> MeasurementBasis {
    let diff = psi0.projector() - psi1.projector();
    let eig = diff.eigh();
    // Ascending eigenvalues: the positive eigenvector favours ψ0.
    let favours0 = PureState::from_vector_unchecked(eig.vectors[1]);
    let favours1 = PureState::from_vector_unchecked(eig.vectors[0]);
    MeasurementBasis::new(favours0, favours1).expect("Hermitian eigenvectors are orthonormal")
}

/// Success probability of the Helstrom measurement for equal priors:
/// `½(1 + √(1 − |⟨ψ0|ψ1⟩|²))`.
pub fn helstrom_success(psi0: &PureState, psi1: &PureState) -> f64 {
    0.5 * (1.0 + (1.0 - psi0.inner(psi1).norm_sqr()).max(0.0).sqrt())
}
