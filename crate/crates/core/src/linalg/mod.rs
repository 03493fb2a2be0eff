//! Fixed-size dense linear algebra: just enough for 4x4 (and 2x2) work.

mod complex;
mod expm;
mod jacobi;
mod matrix;

pub use complex::{CMatrix, CMatrix4};
pub use expm::{expm, expm_taylor, Diagonalization};
pub use jacobi::{condition_number, spectral_norm, sqrtm_spd, symmetric_eigen, SymmetricEigen};
pub use matrix::{Matrix, Matrix2, Matrix4, Vector, Vector2, Vector4};

/// `||lhs - rhs||_F / max(1, scale)`; the residual measure used throughout.
pub fn scaled_residual<const N: usize>(lhs: &Matrix<N>, rhs: &Matrix<N>, scale: f64) -> f64 {
    (*lhs - *rhs).frobenius_norm() / scale.max(1.0)
}
