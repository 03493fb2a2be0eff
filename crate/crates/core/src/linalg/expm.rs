//! Matrix exponential `e^{A tau}`.
//!
//! Two independent routes: an exact one through a caller-supplied
//! diagonalisation `A = T diag(rates) T^-1`, and scaling-and-squaring with a
//! truncated Taylor series that needs nothing but `A`.

use super::matrix::Matrix;

const TAYLOR_TERMS: usize = 18;
const SCALED_NORM_BOUND: f64 = 0.5;

/// A diagonalising pair for some matrix: `A = t * diag(rates) * t_inv`.
#[derive(Debug, Clone, Copy)]
pub struct Diagonalization<const N: usize> {
    pub t: Matrix<N>,
    pub t_inv: Matrix<N>,
    pub rates: [f64; N],
}

impl<const N: usize> Diagonalization<N> {
    pub fn exp(&self, tau: f64) -> Matrix<N> {
        self.t * Matrix::diag(self.rates.map(|r| (r * tau).exp())) * self.t_inv
    }

    /// The diagonalisation of `A^T`, namely `(t_inv)^T diag(rates) t^T`.
    pub fn adjoint(&self) -> Self {
        Self {
            t: self.t_inv.adjoint(),
            t_inv: self.t.adjoint(),
            rates: self.rates,
        }
    }
}

/// Scaling and squaring: pick `s` with `||A tau / 2^s||_1 < 0.5`, sum 18 Taylor
/// terms, then square `s` times.
pub fn expm_taylor<const N: usize>(a: &Matrix<N>, tau: f64) -> Matrix<N> {
    let scaled = a.scale(tau);
    let norm = scaled.norm_1();
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) >= SCALED_NORM_BOUND {
        squarings += 1;
    }
    let x = scaled.scale(0.5f64.powi(squarings as i32));

    let mut sum = Matrix::<N>::identity();
    let mut term = Matrix::<N>::identity();
    for k in 1..=TAYLOR_TERMS {
        term = (term * x).scale(1.0 / k as f64);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `e^{A tau}`, through `diag` when one is supplied and by Taylor otherwise.
pub fn expm<const N: usize>(a: &Matrix<N>, tau: f64, diag: Option<&Diagonalization<N>>) -> Matrix<N> {
    match diag {
        Some(d) => d.exp(tau),
        None => expm_taylor(a, tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix4;

    #[test]
    fn exponential_of_zero_is_identity() {
        for tau in [0.0, 1.0, 17.5] {
            assert_eq!(expm_taylor(&Matrix4::zeros(), tau), Matrix4::identity());
        }
    }

    #[test]
    fn exponential_of_diagonal() {
        let rates = [0.0, 0.8, 1.3, 2.1];
        let e = expm_taylor(&Matrix4::diag(rates), 1.0);
        for (i, r) in rates.iter().enumerate() {
            let want = r.exp();
            assert!(((e.0[i][i] - want) / want).abs() < 1e-14, "entry {i}");
        }
        assert!((e - Matrix4::diag(rates.map(f64::exp))).max_abs() < 1e-13);
    }

    #[test]
    fn rotation_generator() {
        // e^{J theta} with J = [[0,-1],[1,0]] is a rotation by theta
        let j = crate::linalg::Matrix2::from_rows([[0.0, -1.0], [1.0, 0.0]]);
        let theta = 2.3f64;
        let e = expm_taylor(&j, theta);
        let want = crate::linalg::Matrix2::from_rows([
            [theta.cos(), -theta.sin()],
            [theta.sin(), theta.cos()],
        ]);
        assert!((e - want).max_abs() < 1e-14);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let mut n = Matrix4::zeros();
        n.0[0][1] = 1.0;
        n.0[1][2] = 1.0;
        let e = expm_taylor(&n, 3.0);
        assert!((e.0[0][1] - 3.0).abs() < 1e-14);
        assert!((e.0[0][2] - 4.5).abs() < 1e-14);
    }
}
