//! Fixed-size complex linear algebra for single qubits (2×2) and qubit pairs (4×4).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvalues this close to zero are treated as exact zeros when taking
/// matrix functions such as the square root.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// A 2×2 complex matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

/// Eigendecomposition of a Hermitian 2×2 matrix, eigenvalues ascending.
#[derive(Debug, Clone, Copy)]
pub struct Eigen2 {
    pub values: [f64; 2],
    pub vectors: [[Complex64; 2]; 2],
}

impl Matrix2 {
    pub const fn new(entries: [[Complex64; 2]; 2]) -> Self {
        Self(entries)
    }

    pub fn from_real(entries: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self([
            [c(entries[0][0]), c(entries[0][1])],
            [c(entries[1][0]), c(entries[1][1])],
        ])
    }

    pub const fn zero() -> Self {
        Self([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: [Complex64; 2], w: [Complex64; 2]) -> Self {
        let mut m = Self::zero();
        for (r, vr) in v.iter().enumerate() {
            for (c, wc) in w.iter().enumerate() {
                m.0[r][c] = vr * wc.conj();
            }
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = *self - self.dagger();
        d.0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other)
            .0
            .iter()
            .flatten()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// Replaces the matrix by `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale(Complex64::new(0.5, 0.0))
    }

    /// Closed-form eigendecomposition. Only the Hermitian part of `self` is used.
    pub fn eigh(&self) -> Eigen2 {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = (self.0[0][1] + self.0[1][0].conj()) * 0.5;

        let mean = 0.5 * (a + d);
        let half_gap = 0.5 * (a - d);
        let radius = half_gap.hypot(b.norm());
        let values = [mean - radius, mean + radius];

        if radius == 0.0 {
            return Eigen2 {
                values,
                vectors: [[ONE, ZERO], [ZERO, ONE]],
            };
        }

        // Two candidate eigenvectors per eigenvalue come from the two rows of
        // (H - λI); the one with larger norm is numerically safer.
        let vector_for = |lambda: f64| -> [Complex64; 2] {
            let u = [b, Complex64::new(lambda - a, 0.0)];
            let w = [Complex64::new(lambda - d, 0.0), b.conj()];
            let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
            let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
            let (v, n) = if nu >= nw { (u, nu) } else { (w, nw) };
            [v[0] / n, v[1] / n]
        };
        let low = vector_for(values[0]);
        // Orthogonal complement of `low` keeps the pair exactly orthonormal.
        let high = [-low[1].conj(), low[0].conj()];
        Eigen2 {
            values,
            vectors: [low, high],
        }
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.eigh().values
    }

    /// Applies a real function to the spectrum of the Hermitian part.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let eig = self.eigh();
        let mut out = Self::zero();
        for (value, vector) in eig.values.iter().zip(eig.vectors.iter()) {
            let proj = Self::outer(*vector, *vector);
            out = out + proj.scale(Complex64::new(f(*value), 0.0));
        }
        out
    }

    /// Square root of a positive semi-definite matrix; negative eigenvalues
    /// are clamped to zero first.
    pub fn sqrt_psd(&self) -> Self {
        self.map_spectrum(|x| if x <= EIGEN_FLOOR { 0.0 } else { x.sqrt() })
    }
}

impl Add for Matrix2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }
}

impl Sub for Matrix2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] -= rhs.0[r][c];
            }
        }
        out
    }
}

impl Mul for Matrix2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][0] * rhs.0[0][c] + self.0[r][1] * rhs.0[1][c];
            }
        }
        out
    }
}

/// A 4×4 complex matrix over a two-qubit space, basis order |ab⟩ ↦ 2a + b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[Complex64; 4]; 4]);

impl Matrix4 {
    pub const fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn outer(v: [Complex64; 4], w: [Complex64; 4]) -> Self {
        let mut m = Self::zero();
        for (r, vr) in v.iter().enumerate() {
            for (c, wc) in w.iter().enumerate() {
                m.0[r][c] = vr * wc.conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.0[r][c] - self.0[c][r].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let rows: Vec<Vec<Complex64>> = self.0.iter().map(|r| r.to_vec()).collect();
        hermitian_eigenvalues(&rows)
    }
}

/// Eigenvalues (ascending) of an n×n Hermitian matrix.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled; cyclic Jacobi
/// rotations then diagonalize the real matrix.
pub fn hermitian_eigenvalues(h: &[Vec<Complex64>]) -> Vec<f64> {
    let n = h.len();
    let m = 2 * n;
    let mut s = vec![vec![0.0_f64; m]; m];
    for r in 0..n {
        for c in 0..n {
            let z = 0.5 * (h[r][c] + h[c][r].conj());
            s[r][c] = z.re;
            s[r + n][c + n] = z.re;
            s[r][c + n] = -z.im;
            s[r + n][c] = z.im;
        }
    }

    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|r| (0..m).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| s[r][c] * s[r][c])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if s[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for row in s.iter_mut() {
                    let (skp, skq) = (row[p], row[q]);
                    row[p] = c * skp - sn * skq;
                    row[q] = sn * skp + c * skq;
                }
                let (head, tail) = s.split_at_mut(q);
                for (spk, sqk) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (a, b) = (*spk, *sqk);
                    *spk = c * a - sn * b;
                    *sqk = sn * a + c * b;
                }
            }
        }
    }

    let mut diag: Vec<f64> = (0..m).map(|i| s[i][i]).collect();
    diag.sort_by(f64::total_cmp);
    // Each eigenvalue of H appears twice in the embedding.
    diag.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}
