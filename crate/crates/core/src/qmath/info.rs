//! Classical information measures on finite outcome distributions. Entropies are in bits.

use super::{QmathError, DERIVED_TOL};

fn validate(dist: &[f64]) -> Result<(), QmathError> {
    if dist.is_empty() {
        return Err(QmathError::EmptyDistribution);
    }
    if let Some(&value) = dist.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(QmathError::NegativeProbability { value });
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > DERIVED_TOL {
        return Err(QmathError::NotNormalizedDistribution { total });
    }
    Ok(())
}

fn validate_pair(p0: &[f64], p1: &[f64]) -> Result<(), QmathError> {
    validate(p0)?;
    validate(p1)?;
    if p0.len() != p1.len() {
        return Err(QmathError::LengthMismatch {
            left: p0.len(),
            right: p1.len(),
        });
    }
    Ok(())
}

fn validate_priors(pi0: f64, pi1: f64) -> Result<(), QmathError> {
    validate(&[pi0, pi1])
}

fn entropy_unchecked(dist: &[f64]) -> f64 {
    -dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// `H(q) = −Σ q(b) log₂ q(b)` with `0·log 0 = 0`.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64, QmathError> {
    validate(dist)?;
    Ok(entropy_unchecked(dist).max(0.0))
}

/// `I(p0, p1) = H(π0 p0 + π1 p1) − π0 H(p0) − π1 H(p1)`.
pub fn mutual_information(p0: &[f64], p1: &[f64], pi0: f64, pi1: f64) -> Result<f64, QmathError> {
    validate_pair(p0, p1)?;
    validate_priors(pi0, pi1)?;
    let mix: Vec<f64> = p0.iter().zip(p1).map(|(a, b)| pi0 * a + pi1 * b).collect();
    let info = entropy_unchecked(&mix) - pi0 * entropy_unchecked(p0) - pi1 * entropy_unchecked(p1);
    Ok(info.max(0.0))
}

/// `B(p0, p1) = Σ √p0(b)·√p1(b)`
pub fn statistical_overlap(p0: &[f64], p1: &[f64]) -> Result<f64, QmathError> {
    validate_pair(p0, p1)?;
    let b: f64 = p0.iter().zip(p1).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(b.clamp(0.0, 1.0))
}

/// Expected error of the Bayes-optimal guess: `Σ min{π0 p0(b), π1 p1(b)}`.
pub fn bayes_error(p0: &[f64], p1: &[f64], pi0: f64, pi1: f64) -> Result<f64, QmathError> {
    validate_pair(p0, p1)?;
    validate_priors(pi0, pi1)?;
    Ok(p0
        .iter()
        .zip(p1)
        .map(|(a, b)| (pi0 * a).min(pi1 * b))
        .sum())
}

/// Classical Kolmogorov (total variation) distance `½ Σ |p0(b) − p1(b)|`.
pub fn classical_kolmogorov(p0: &[f64], p1: &[f64]) -> Result<f64, QmathError> {
    validate_pair(p0, p1)?;
    Ok(0.5 * p0.iter().zip(p1).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_unchecked(&[p, 1.0 - p])
}
