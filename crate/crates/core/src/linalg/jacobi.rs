//! Cyclic Jacobi eigendecomposition for small symmetric matrices and the
//! functions built on it (SPD square root, spectral norm).

use super::matrix::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 50;
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigenpairs of a symmetric matrix: `a = v * diag(values) * v^T`, values ascending.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricEigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: Matrix<N>,
}

fn off_diagonal_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a.0[i][j] * a.0[i][j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops below
/// `1e-14 * ||a||_F`. Only the symmetric part of `a` is used.
pub fn symmetric_eigen<const N: usize>(a: &Matrix<N>) -> Result<SymmetricEigen<N>> {
    let mut m = (*a + a.adjoint()).scale(0.5);
    let mut v = Matrix::<N>::identity();
    let threshold = OFF_DIAGONAL_TOL * m.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut converged = off_diagonal_norm(&m) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..N {
            for q in p + 1..N {
                let apq = m.0[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.0[q][q] - m.0[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // m <- J^T m J, with J the (p, q) Givens rotation
                for k in 0..N {
                    let mkp = m.0[k][p];
                    let mkq = m.0[k][q];
                    m.0[k][p] = c * mkp - s * mkq;
                    m.0[k][q] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let mpk = m.0[p][k];
                    let mqk = m.0[q][k];
                    m.0[p][k] = c * mpk - s * mqk;
                    m.0[q][k] = s * mpk + c * mqk;
                }
                for k in 0..N {
                    let vkp = v.0[k][p];
                    let vkq = v.0[k][q];
                    v.0[k][p] = c * vkp - s * vkq;
                    v.0[k][q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&m) <= threshold;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps });
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| m.0[i][i].total_cmp(&m.0[j][j]));
    let values = order.map(|i| m.0[i][i]);
    let vectors = Matrix(std::array::from_fn(|r| order.map(|c| v.0[r][c])));
    Ok(SymmetricEigen { values, vectors })
}

impl<const N: usize> SymmetricEigen<N> {
    /// `v * diag(f(values)) * v^T`
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Matrix<N> {
        let d = Matrix::diag(self.values.map(f));
        self.vectors * d * self.vectors.adjoint()
    }
}

/// Symmetric positive-definite square root.
pub fn sqrtm_spd<const N: usize>(a: &Matrix<N>) -> Result<Matrix<N>> {
    let scale = a.max_abs().max(1.0);
    if a.asymmetry() > 1e-10 * scale {
        return Err(Error::NotSpd { eigenvalue: f64::NAN });
    }
    let eig = symmetric_eigen(a)?;
    if let Some(&bad) = eig.values.iter().find(|&&x| x <= 0.0) {
        return Err(Error::NotSpd { eigenvalue: bad });
    }
    let root = eig.apply(f64::sqrt);
    // exact symmetrisation; the product above is symmetric only up to rounding
    Ok((root + root.adjoint()).scale(0.5))
}

/// Largest singular value, from the Jacobi spectrum of `a^T a`.
pub fn spectral_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    let gram = a.adjoint() * *a;
    match symmetric_eigen(&gram) {
        Ok(eig) => eig.values[N - 1].max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}

/// Ratio of the extreme singular values.
pub fn condition_number<const N: usize>(a: &Matrix<N>) -> f64 {
    let gram = a.adjoint() * *a;
    match symmetric_eigen(&gram) {
        Ok(eig) => (eig.values[N - 1] / eig.values[0]).sqrt(),
        Err(_) => f64::NAN,
    }
}
