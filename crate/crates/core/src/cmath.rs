//! Complex linear algebra for the two-qubit protocol.
//!
//! Only the shapes the protocol needs are provided: 2×2 local operators,
//! 4×4 two-coin operators and 4-component state vectors. The basis of every
//! 4-dimensional object is `[|CC⟩, |CD⟩, |DC⟩, |DD⟩]`, with agent 1 in the
//! left tensor slot.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Index, Mul};

pub use num_complex::Complex64 as Complex;

use crate::error::{check_range, Result};

/// Default tolerance for unitarity and normalization checks.
pub const UNITARY_TOL: f64 = 1e-9;
/// Default tolerance for structural identities (shortcut vs full product).
pub const STRUCTURAL_TOL: f64 = 1e-12;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[Complex; 2]; 2]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[Complex; 4]; 4]);

/// Amplitudes ordered `[|CC⟩, |CD⟩, |DC⟩, |DD⟩]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector4(pub [Complex; 4]);

impl Matrix2 {
    pub fn identity() -> Self {
        Matrix2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn conjugate_transpose(&self) -> Self {
        let m = &self.0;
        Matrix2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, k: Complex) -> Self {
        Matrix2(self.0.map(|row| row.map(|z| z * k)))
    }

    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        max_diff(self.0.iter().flatten(), other.0.iter().flatten())
    }
}

impl Index<(usize, usize)> for Matrix2 {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.0[r][c]
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = (0..2).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        Matrix2(out)
    }
}

impl Matrix4 {
    pub fn identity() -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (k, row) in out.iter_mut().enumerate() {
            row[k] = ONE;
        }
        Matrix4(out)
    }

    pub fn conjugate_transpose(&self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.0[c][r].conj();
            }
        }
        Matrix4(out)
    }

    pub fn scale(&self, k: Complex) -> Self {
        Matrix4(self.0.map(|row| row.map(|z| z * k)))
    }

    pub fn column(&self, c: usize) -> Vector4 {
        Vector4([self.0[0][c], self.0[1][c], self.0[2][c], self.0[3][c]])
    }

    pub fn mul_vec(&self, v: &Vector4) -> Vector4 {
        let mut out = [ZERO; 4];
        for (r, cell) in out.iter_mut().enumerate() {
            *cell = (0..4).map(|k| self.0[r][k] * v.0[k]).sum();
        }
        Vector4(out)
    }

    pub fn max_abs_diff(&self, other: &Matrix4) -> f64 {
        max_diff(self.0.iter().flatten(), other.0.iter().flatten())
    }
}

impl Index<(usize, usize)> for Matrix4 {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.0[r][c]
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        Matrix4(out)
    }
}

impl Vector4 {
    /// Computational basis vector `index` (0 = |CC⟩ … 3 = |DD⟩).
    pub fn basis(index: usize) -> Self {
        let mut v = [ZERO; 4];
        v[index] = ONE;
        Vector4(v)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, k: Complex) -> Self {
        Vector4(self.0.map(|z| z * k))
    }

    pub fn add(&self, other: &Vector4) -> Self {
        Vector4([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
            self.0[3] + other.0[3],
        ])
    }

    pub fn max_abs_diff(&self, other: &Vector4) -> f64 {
        max_diff(self.0.iter(), other.0.iter())
    }
}

impl Index<usize> for Vector4 {
    type Output = Complex;
    fn index(&self, k: usize) -> &Complex {
        &self.0[k]
    }
}

fn max_diff<'a>(a: impl Iterator<Item = &'a Complex>, b: impl Iterator<Item = &'a Complex>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Square complex matrices that can be tested for unitarity.
pub trait SquareMatrix: Copy {
    /// `‖M·M† − I‖_max`.
    fn unitarity_defect(&self) -> f64;
}

impl SquareMatrix for Matrix2 {
    fn unitarity_defect(&self) -> f64 {
        (*self * self.conjugate_transpose()).max_abs_diff(&Matrix2::identity())
    }
}

impl SquareMatrix for Matrix4 {
    fn unitarity_defect(&self) -> f64 {
        (*self * self.conjugate_transpose()).max_abs_diff(&Matrix4::identity())
    }
}

/// True iff `‖M·M† − I‖_max ≤ tol`.
pub fn is_unitary<M: SquareMatrix>(m: &M, tol: f64) -> bool {
    debug_assert!(tol > 0.0, "tolerance must be positive");
    m.unitarity_defect() <= tol
}

/// The two-parameter local operator
/// `[[e^{iφ}cos(θ/2), i sin(θ/2)], [i sin(θ/2), e^{-iφ}cos(θ/2)]]`
/// with `θ ∈ [0,π]`, `φ ∈ [0,π/2]`.
pub fn omega(theta: f64, phi: f64) -> Result<Matrix2> {
    check_range("theta", theta, 0.0, PI)?;
    check_range("phi", phi, 0.0, FRAC_PI_2)?;
    Ok(omega_unchecked(theta, phi, 0.0))
}

/// Three-parameter extension with an extra phase `α ∈ [0,π/2]` on the
/// off-diagonal entries. `omega_extended(θ, φ, 0) == omega(θ, φ)`.
pub fn omega_extended(theta: f64, phi: f64, alpha: f64) -> Result<Matrix2> {
    check_range("theta", theta, 0.0, PI)?;
    check_range("phi", phi, 0.0, FRAC_PI_2)?;
    check_range("alpha", alpha, 0.0, FRAC_PI_2)?;
    Ok(omega_unchecked(theta, phi, alpha))
}

pub(crate) fn omega_unchecked(theta: f64, phi: f64, alpha: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let diag = Complex::from_polar(c, phi);
    let off = I * Complex::from_polar(s, alpha);
    let off_conj = I * Complex::from_polar(s, -alpha);
    Matrix2([[diag, off], [off_conj, diag.conj()]])
}

/// The entangling operator `cos(γ/2)·I⊗I + i sin(γ/2)·σx⊗σx`, `γ ∈ [0,π/2]`.
pub fn j_operator(gamma: f64) -> Result<Matrix4> {
    check_range("gamma", gamma, 0.0, FRAC_PI_2)?;
    Ok(j_operator_unchecked(gamma))
}

pub(crate) fn j_operator_unchecked(gamma: f64) -> Matrix4 {
    let (s, c) = (gamma / 2.0).sin_cos();
    let d = Complex::new(c, 0.0);
    let a = Complex::new(0.0, s);
    Matrix4([
        [d, ZERO, ZERO, a],
        [ZERO, d, a, ZERO],
        [ZERO, a, d, ZERO],
        [a, ZERO, ZERO, d],
    ])
}

/// Kronecker product `a ⊗ b`; `a` acts on agent 1's coin.
pub fn tensor2x2(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    Matrix4(out)
}

/// Leftmost and rightmost columns of `a ⊗ b`, without forming the product.
pub fn tensor_outer_columns(a: &Matrix2, b: &Matrix2) -> (Vector4, Vector4) {
    let left = Vector4([
        a.0[0][0] * b.0[0][0],
        a.0[0][0] * b.0[1][0],
        a.0[1][0] * b.0[0][0],
        a.0[1][0] * b.0[1][0],
    ]);
    let right = Vector4([
        a.0[0][1] * b.0[0][1],
        a.0[0][1] * b.0[1][1],
        a.0[1][1] * b.0[0][1],
        a.0[1][1] * b.0[1][1],
    ]);
    (left, right)
}
