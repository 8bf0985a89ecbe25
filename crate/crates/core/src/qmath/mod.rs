//! Single-qubit quantum information toolkit.
//!
//! Everything here is exact 2×2 (and 4×4 for a qubit pair) complex algebra:
//! BB84 states, Born-rule sampling, density operators built from ensembles,
//! POVMs, and the classical and quantum distinguishability measures used to
//! quantify what an eavesdropper can learn.

mod distinguish;
mod info;
pub mod linalg;
mod state;

pub use distinguish::{
    average_cloning_efficiency, bhattacharyya, cloning_efficiency_bound, fidelity_pure,
    helstrom_measurement, helstrom_success, kolmogorov_distance,
};
pub use info::{
    bayes_error, binary_entropy, classical_kolmogorov, mutual_information, shannon_entropy,
    statistical_overlap,
};
pub use linalg::{Matrix2, Matrix4};
pub use state::{
    born_probability, density_from_ensemble, make_bb84_state, measure, partial_trace_b, Basis,
    DensityMatrix, Ensemble, EnsembleState, JointDensityMatrix, MeasurementBasis, PureState, Povm,
};

/// Tolerance for algebraic invariants (normalization, Hermiticity, trace).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for derived quantities (distribution sums, information measures).
pub const DERIVED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QmathError {
    #[error("state is not normalized (squared norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("measurement states are not orthogonal (overlap {overlap})")]
    NotOrthogonal { overlap: f64 },
    #[error("matrix is not Hermitian (defect {defect})")]
    NotHermitian { defect: f64 },
    #[error("matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue})")]
    NotPositive { eigenvalue: f64 },
    #[error("POVM has no elements")]
    EmptyPovm,
    #[error("POVM elements do not sum to the identity (defect {defect})")]
    IncompletePovm { defect: f64 },
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("negative or non-finite probability {value}")]
    NegativeProbability { value: f64 },
    #[error("probabilities sum to {total}, expected 1")]
    NotNormalizedDistribution { total: f64 },
    #[error("distributions have different supports ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },
}

#[cfg(test)]
mod proptests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pure_state() -> impl Strategy<Value = PureState> {
        (0.0..std::f64::consts::PI, 0.0..(2.0 * std::f64::consts::PI)).prop_map(|(theta, phi)| {
            PureState::new(
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            )
            .unwrap()
        })
    }

    fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0..1.0_f64, len).prop_filter_map("nonzero mass", |w| {
            let total: f64 = w.iter().sum();
            (total > 1e-3).then(|| w.iter().map(|x| x / total).collect())
        })
    }

    fn ensemble() -> impl Strategy<Value = Ensemble> {
        (1usize..6).prop_flat_map(|k| {
            (distribution(k), prop::collection::vec(pure_state(), k)).prop_map(|(p, states)| {
                Ensemble::pure(p.into_iter().zip(states)).unwrap()
            })
        })
    }

    fn check_density(rho: &DensityMatrix) {
        let m = rho.matrix();
        assert!(m.hermiticity_defect() <= ALGEBRAIC_TOL);
        assert!((m.trace().re - 1.0).abs() <= ALGEBRAIC_TOL);
        assert!(rho.eigenvalues()[0] >= -ALGEBRAIC_TOL);
    }

    proptest! {
        #[test]
        fn ensembles_yield_valid_densities(e in ensemble()) {
            check_density(&density_from_ensemble(&e).unwrap());
        }

        #[test]
        fn reduced_product_states_are_valid(a in pure_state(), b in pure_state()) {
            let joint = JointDensityMatrix::from_pure(a.tensor(&b)).unwrap();
            let reduced = partial_trace_b(&joint).unwrap();
            check_density(&reduced);
            prop_assert!(reduced.matrix().max_abs_diff(&a.projector()) < 1e-12);
        }

        #[test]
        fn pure_state_distance_identities(a in pure_state(), b in pure_state()) {
            let overlap = a.inner(&b).norm();
            let (ra, rb) = (a.density(), b.density());
            prop_assert!((bhattacharyya(&ra, &rb) - overlap).abs() < 1e-9);
            let k = (1.0 - overlap * overlap).max(0.0).sqrt();
            prop_assert!((kolmogorov_distance(&ra, &rb) - k).abs() < 1e-9);
        }

        #[test]
        fn povm_outcomes_never_beat_trace_distance(
            e0 in ensemble(), e1 in ensemble(), m in pure_state(), n in pure_state()
        ) {
            let rho0 = density_from_ensemble(&e0).unwrap();
            let rho1 = density_from_ensemble(&e1).unwrap();
            let bound = kolmogorov_distance(&rho0, &rho1);
            // Four-outcome POVM: halves of two projective measurements.
            let half = Complex64::new(0.5, 0.0);
            let perp = |s: &PureState| PureState::new(-s.amp1().conj(), s.amp0().conj()).unwrap();
            let povm = Povm::new(vec![
                m.projector().scale(half),
                perp(&m).projector().scale(half),
                n.projector().scale(half),
                perp(&n).projector().scale(half),
            ]).unwrap();
            let p0 = povm.outcome_distribution(&rho0);
            let p1 = povm.outcome_distribution(&rho1);
            prop_assert!(classical_kolmogorov(&p0, &p1).unwrap() <= bound + 1e-9);
            let proj = Povm::projective(&MeasurementBasis::new(m, perp(&m)).unwrap());
            let q0 = proj.outcome_distribution(&rho0);
            let q1 = proj.outcome_distribution(&rho1);
            prop_assert!(classical_kolmogorov(&q0, &q1).unwrap() <= bound + 1e-9);
        }

        #[test]
        fn mutual_information_zero_iff_equal(
            p0 in distribution(3), p1 in distribution(3), pi0 in 0.05..0.95_f64
        ) {
            let same = mutual_information(&p0, &p0, pi0, 1.0 - pi0).unwrap();
            prop_assert!(same.abs() < 1e-9);
            let info = mutual_information(&p0, &p1, pi0, 1.0 - pi0).unwrap();
            let max_gap = p0.iter().zip(&p1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if max_gap > 1e-3 {
                prop_assert!(info > 1e-9);
            }
            let h_prior = shannon_entropy(&[pi0, 1.0 - pi0]).unwrap();
            prop_assert!(info <= h_prior + 1e-9);
        }

        #[test]
        fn entropy_is_bounded(p in distribution(4)) {
            let h = shannon_entropy(&p).unwrap();
            prop_assert!((0.0..=2.0 + 1e-12).contains(&h));
        }

        #[test]
        fn bayes_error_bounded(p0 in distribution(3), p1 in distribution(3), pi0 in 0.0..1.0_f64) {
            let pe = bayes_error(&p0, &p1, pi0, 1.0 - pi0).unwrap();
            prop_assert!(pe >= 0.0 && pe <= pi0.min(1.0 - pi0) + 1e-12);
        }
    }

    #[test]
    fn measurement_frequencies_match_born_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let psi = PureState::new(
            Complex64::new(0.8, 0.0),
            Complex64::from_polar(0.6, 1.1),
        )
        .unwrap();
        let trials = 100_000;
        for basis in [Basis::Z, Basis::X] {
            let effect = basis.eigenstates()[1].projector();
            let p1 = born_probability(&psi.density(), &effect).unwrap();
            let ones = (0..trials).filter(|_| measure(&psi, basis, &mut rng).0).count();
            let sigma = (p1 * (1.0 - p1) / trials as f64).sqrt();
            assert!((ones as f64 / trials as f64 - p1).abs() <= 4.0 * sigma);
        }
    }
}
