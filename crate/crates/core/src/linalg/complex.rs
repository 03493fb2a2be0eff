use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::matrix::Matrix;

/// Complex square matrix; only used where a factor of `i` has to be carried
/// explicitly, such as `H_eff = i L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMatrix<const N: usize>(pub [[Complex64; N]; N]);

pub type CMatrix4 = CMatrix<4>;

impl<const N: usize> CMatrix<N> {
    pub fn zeros() -> Self {
        Self([[Complex64::new(0.0, 0.0); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(a: &Matrix<N>) -> Self {
        Self(a.0.map(|row| row.map(|x| Complex64::new(x, 0.0))))
    }

    /// Real part, together with the largest absolute imaginary part discarded.
    pub fn real_part(&self) -> (Matrix<N>, f64) {
        let max_im = self.0.iter().flatten().fold(0.0f64, |m, z| m.max(z.im.abs()));
        (Matrix(self.0.map(|row| row.map(|z| z.re))), max_im)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.map(|row| row.map(|z| z * s)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].conj())
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn norm_1(&self) -> f64 {
        (0..N)
            .map(|j| (0..N).map(|i| self.0[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `e^{A tau}` by scaling and squaring with an 18-term Taylor series.
    pub fn expm(&self, tau: f64) -> Self {
        let scaled = self.scale(Complex64::new(tau, 0.0));
        let norm = scaled.norm_1();
        let mut squarings = 0i32;
        while norm / 2f64.powi(squarings) >= 0.5 {
            squarings += 1;
        }
        let x = scaled.scale(Complex64::new(0.5f64.powi(squarings), 0.0));
        let mut sum = Self::identity();
        let mut term = Self::identity();
        for k in 1..=18 {
            term = (term * x).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl<const N: usize> Mul for CMatrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..N).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
        }))
    }
}

impl<const N: usize> Add for CMatrix<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl<const N: usize> Sub for CMatrix<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}
