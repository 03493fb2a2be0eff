//! The first-order generator `Psi' = L Psi` of the coupled circuit and its
//! closed-form spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix4, Matrix4};
use crate::params::{validate, DerivedParams};

/// Relative gap below which two eigenvalues count as colliding.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// The four real eigenvalues of the Liouvillian and their shifted form.
///
/// `l3 < l1 < 0 < l2 < l4` with `l2 = -l1`, `l4 = -l3`; the shifted values
/// are the eigenvalues of `L - l3 I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub rho: f64,
}

impl Spectrum {
    /// Eigenvalue of `L` attached to the mode `(k, n)`: `k lambda1 + n lambda2 + l3`.
    pub fn eigenvalue(&self, k: usize, n: usize) -> f64 {
        k as f64 * self.lambda1 + n as f64 * self.lambda2 + self.l3
    }

    /// Eigenvalues of `L` in mode order (0,0), (1,0), (0,1), (1,1): `(l3, l1, l2, l4)`.
    pub fn mode_rates(&self) -> [f64; 4] {
        [self.l3, self.l1, self.l2, self.l4]
    }

    /// Eigenvalues of the shifted generator in mode order: `(0, lambda1, lambda2, lambda1 + lambda2)`.
    pub fn shifted_rates(&self) -> [f64; 4] {
        [self.lambda0, self.lambda1, self.lambda2, self.lambda1 + self.lambda2]
    }
}

/// Builds the Liouvillian without regime checks.
pub fn build_liouvillian_unchecked(d: &DerivedParams) -> Matrix4 {
    let (a, am, g) = (d.alpha, d.alpha * d.mu, d.gamma);
    Matrix4::from_rows([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-a, am, g, 0.0],
        [am, -a, 0.0, -g],
    ])
}

/// Builds the Liouvillian, refusing parameters outside the real-spectrum regime.
/// `mu = 0` is allowed.
pub fn build_liouvillian(d: &DerivedParams) -> Result<Matrix4> {
    let report = validate(d);
    if !(report.condition_rho_positive && report.condition_gamma_sq_gt_2alpha) {
        return Err(Error::RegimeRejected(
            report.failure_reason().unwrap_or_default(),
        ));
    }
    Ok(build_liouvillian_unchecked(d))
}

/// `H_eff = i L`, for callers that want the Schrödinger-like form.
pub fn effective_hamiltonian(d: &DerivedParams) -> CMatrix4 {
    CMatrix4::from_real(&build_liouvillian_unchecked(d)).scale(Complex64::new(0.0, 1.0))
}

/// `L - l3 I`
pub fn shift(l: &Matrix4, spectrum: &Spectrum) -> Matrix4 {
    *l - Matrix4::identity().scale(spectrum.l3)
}

/// Closed-form eigenvalues.
pub fn spectrum(d: &DerivedParams) -> Result<Spectrum> {
    let report = validate(d);
    if !report.spectral_ok() {
        return Err(Error::RegimeRejected(
            report.failure_reason().unwrap_or_default(),
        ));
    }
    let rho = report.rho;
    let spread = d.gamma * d.gamma - 2.0 * d.alpha;
    let root = rho.sqrt();
    let l2 = ((spread - root) / 2.0).sqrt();
    let l4 = ((spread + root) / 2.0).sqrt();
    let (l1, l3) = (-l2, -l4);

    let values = [l3, l1, l2, l4];
    let mut gap = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            gap = gap.min((values[i] - values[j]).abs());
        }
    }
    if !(gap >= DEGENERACY_GAP * l4) {
        return Err(Error::NearDegenerate { gap, scale: l4 });
    }

    Ok(Spectrum {
        l1,
        l2,
        l3,
        l4,
        lambda0: 0.0,
        lambda1: l1 - l3,
        lambda2: l2 - l3,
        lambda3: l4 - l3,
        rho,
    })
}

/// `|l^4 + (2 alpha - gamma^2) l^2 + alpha^2 (1 - mu^2)| / max(1, l^4)` for each
/// eigenvalue `(l1, l2, l3, l4)`.
pub fn characteristic_residual(s: &Spectrum, d: &DerivedParams) -> [f64; 4] {
    [s.l1, s.l2, s.l3, s.l4].map(|l| {
        let l2 = l * l;
        let p = l2 * l2 + (2.0 * d.alpha - d.gamma * d.gamma) * l2 + quartic_constant(d);
        p.abs() / (l2 * l2).max(1.0)
    })
}

/// Constant term `alpha^2 (1 - mu^2)` of the characteristic quartic.
pub fn quartic_constant(d: &DerivedParams) -> f64 {
    d.alpha * d.alpha * (1.0 - d.mu * d.mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> DerivedParams {
        DerivedParams::from_dimensionless(0.5, 3.0)
    }

    #[test]
    fn matrix_layout() {
        let l = build_liouvillian(&reference()).unwrap();
        assert_eq!(l.row(2).0, [-4.0 / 3.0, 2.0 / 3.0, 3.0, 0.0]);
        assert_eq!(l.row(3).0, [2.0 / 3.0, -4.0 / 3.0, 0.0, -3.0]);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(l[(i, j)], 0.0);
                assert_eq!(l[(i, j + 2)], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(l.trace(), 0.0);
    }

    #[test]
    fn decoupled_liouvillian_is_block_diagonal() {
        let l = build_liouvillian(&DerivedParams::from_dimensionless(0.0, 3.0)).unwrap();
        assert_eq!(l[(2, 1)], 0.0);
        assert_eq!(l[(3, 0)], 0.0);
    }

    #[test]
    fn rejected_regime() {
        let d = DerivedParams::from_dimensionless(0.5, 2.0);
        assert!(matches!(build_liouvillian(&d), Err(Error::RegimeRejected(_))));
        assert!(matches!(spectrum(&d), Err(Error::RegimeRejected(_))));
        // unchecked construction still works for exploration
        assert_eq!(build_liouvillian_unchecked(&d)[(2, 2)], 2.0);
    }

    #[test]
    fn decoupled_spectrum_solves_the_sub_circuit_quadratic() {
        // s^2 - gamma s + 1 = 0 for gamma = 3
        let s = spectrum(&DerivedParams::from_dimensionless(0.0, 3.0)).unwrap();
        assert!((s.l4 - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((s.l2 - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_spectrum_structure() {
        let s = spectrum(&reference()).unwrap();
        assert_eq!(s.l2, -s.l1);
        assert_eq!(s.l4, -s.l3);
        assert!(s.l3 < s.l1 && s.l1 < 0.0 && 0.0 < s.l2 && s.l2 < s.l4);
        assert!(s.lambda0 == 0.0 && s.lambda1 < s.lambda2 && s.lambda2 < s.lambda3);
        assert!((s.lambda3 - (s.lambda1 + s.lambda2)).abs() < 1e-12);
        assert_eq!(s.eigenvalue(0, 0), s.l3);
        assert!((s.eigenvalue(1, 1) - s.l4).abs() < 1e-12);
    }

    #[test]
    fn shift_and_trace() {
        let d = reference();
        let l = build_liouvillian(&d).unwrap();
        let s = spectrum(&d).unwrap();
        let lt = shift(&l, &s);
        assert_eq!(lt + Matrix4::identity().scale(s.l3), l);
        assert!((lt.trace() - (l.trace() - 4.0 * s.l3)).abs() < 1e-12);
    }

    #[test]
    fn quartic_residuals() {
        let d = reference();
        let s = spectrum(&d).unwrap();
        assert!(characteristic_residual(&s, &d).iter().all(|&r| r < 1e-9));
        let d0 = DerivedParams::from_dimensionless(0.0, 3.0);
        let s0 = spectrum(&d0).unwrap();
        assert!(characteristic_residual(&s0, &d0).iter().all(|&r| r < 1e-12));
        assert!((quartic_constant(&d) - d.alpha).abs() < 1e-15);
    }

    #[test]
    fn effective_hamiltonian_is_i_times_l() {
        let d = reference();
        let h = effective_hamiltonian(&d);
        let l = build_liouvillian_unchecked(&d);
        assert_eq!(h.0[2][0], Complex64::new(0.0, l[(2, 0)]));
        let (re, im) = (h.scale(Complex64::new(0.0, -1.0))).real_part();
        assert_eq!(re, l);
        assert_eq!(im, 0.0);
    }
}
