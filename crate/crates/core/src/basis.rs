//! Biorthogonal eigenbases of the Liouvillian and its adjoint.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{scaled_residual, Matrix4, Vector4};
use crate::liouvillian::Spectrum;
use crate::pfalgebra::{mode_index, MODES};
use crate::report::VerificationReport;

pub const BASIS_TOL: f64 = 1e-9;
pub const BIORTHOGONALITY_TOL: f64 = 1e-10;

/// `phi_{k,n} = T Phi_{k,n}` and `Psi_{k,n} = (T^-1)^T Phi_{k,n}`, indexed `[k][n]`.
///
/// Vectors are left unnormalised; `<Psi_{k,n}, phi_{l,m}> = delta delta` fixes
/// their relative scale once the gauge is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisPair {
    pub phi: [[Vector4; 2]; 2],
    pub psi: [[Vector4; 2]; 2],
    /// Eigenvalue `k lambda1 + n lambda2 + l3` shared by `phi_{k,n}` and `Psi_{k,n}`.
    pub eigenvalue: [[f64; 2]; 2],
}

/// One labelled entry of the JSON export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub k: usize,
    pub n: usize,
    pub eigenvalue: f64,
    pub phi: [f64; 4],
    pub psi: [f64; 4],
}

pub fn build_bases(t: &Matrix4, spectrum: &Spectrum) -> Result<BasisPair> {
    let t_inv = t.inverse()?;
    let mut pair = BasisPair {
        phi: [[Vector4::zeros(); 2]; 2],
        psi: [[Vector4::zeros(); 2]; 2],
        eigenvalue: [[0.0; 2]; 2],
    };
    for (k, n) in MODES {
        let j = mode_index(k, n);
        pair.phi[k][n] = t.column(j);
        // column j of (T^-1)^T is row j of T^-1
        pair.psi[k][n] = t_inv.row(j);
        pair.eigenvalue[k][n] = spectrum.eigenvalue(k, n);
    }
    Ok(pair)
}

impl BasisPair {
    /// `G[i][j] = <Psi_i, phi_j>` in mode order.
    pub fn gram(&self) -> Matrix4 {
        let mut g = Matrix4::zeros();
        for (i, &(k, n)) in MODES.iter().enumerate() {
            for (j, &(l, m)) in MODES.iter().enumerate() {
                g[(i, j)] = self.psi[k][n].dot(&self.phi[l][m]);
            }
        }
        g
    }

    /// `sum |phi><Psi|` and `sum |Psi><phi|`.
    pub fn resolutions(&self) -> (Matrix4, Matrix4) {
        let mut phi_psi = Matrix4::zeros();
        let mut psi_phi = Matrix4::zeros();
        for (k, n) in MODES {
            phi_psi += self.phi[k][n].outer(&self.psi[k][n]);
            psi_phi += self.psi[k][n].outer(&self.phi[k][n]);
        }
        (phi_psi, psi_phi)
    }

    /// Coefficients `<Psi_{k,n}, v>` of `v` in the `phi` basis.
    pub fn expand(&self, v: &Vector4) -> [[f64; 2]; 2] {
        let mut c = [[0.0; 2]; 2];
        for (k, n) in MODES {
            c[k][n] = self.psi[k][n].dot(v);
        }
        c
    }

    pub fn reconstruct(&self, c: &[[f64; 2]; 2]) -> Vector4 {
        MODES
            .iter()
            .fold(Vector4::zeros(), |acc, &(k, n)| acc + self.phi[k][n].scale(c[k][n]))
    }

    /// `sum |<phi_{k,n}, f>|^2`, i.e. `<f, S_phi f>`.
    pub fn frame_sum(&self, f: &Vector4) -> f64 {
        MODES.iter().map(|&(k, n)| self.phi[k][n].dot(f).powi(2)).sum()
    }

    pub fn entries(&self) -> Vec<BasisEntry> {
        MODES
            .iter()
            .map(|&(k, n)| BasisEntry {
                k,
                n,
                eigenvalue: self.eigenvalue[k][n],
                phi: self.phi[k][n].0,
                psi: self.psi[k][n].0,
            })
            .collect()
    }
}

/// Eigen-relation residuals `||L phi - e phi|| / ||phi||` and
/// `||L^T Psi - e Psi|| / ||Psi||`, in mode order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenResiduals {
    pub phi: [f64; 4],
    pub psi: [f64; 4],
}

impl EigenResiduals {
    pub fn max(&self) -> f64 {
        self.phi.iter().chain(&self.psi).fold(0.0, |m, &x| m.max(x))
    }
}

pub fn eigen_check(pair: &BasisPair, l: &Matrix4) -> EigenResiduals {
    let lt = l.adjoint();
    let mut out = EigenResiduals { phi: [0.0; 4], psi: [0.0; 4] };
    for (j, &(k, n)) in MODES.iter().enumerate() {
        let e = pair.eigenvalue[k][n];
        let phi = pair.phi[k][n];
        let psi = pair.psi[k][n];
        out.phi[j] = (*l * phi - phi.scale(e)).norm() / phi.norm();
        out.psi[j] = (lt * psi - psi.scale(e)).norm() / psi.norm();
    }
    out
}

/// `||S_phi Psi_{k,n} - phi_{k,n}|| / ||phi_{k,n}||` in mode order.
pub fn metric_map_check(pair: &BasisPair, s_phi: &Matrix4) -> [f64; 4] {
    MODES.map(|(k, n)| {
        let phi = pair.phi[k][n];
        (*s_phi * pair.psi[k][n] - phi).norm() / phi.norm()
    })
}

/// `||S_psi phi_{k,n} - Psi_{k,n}|| / ||Psi_{k,n}||` in mode order.
pub fn metric_map_inverse_check(pair: &BasisPair, s_psi: &Matrix4) -> [f64; 4] {
    MODES.map(|(k, n)| {
        let psi = pair.psi[k][n];
        (*s_psi * pair.phi[k][n] - psi).norm() / psi.norm()
    })
}

/// The basis suite: biorthonormality, both resolutions of the identity,
/// eigen-relations for `L` and `L^T`, and the metric maps in both directions.
pub fn verify_bases(pair: &BasisPair, l: &Matrix4, s_phi: &Matrix4, s_psi: &Matrix4) -> VerificationReport {
    let mut r = VerificationReport::new();
    let id = Matrix4::identity();
    r.record("biorthonormality", (pair.gram() - id).max_abs(), BIORTHOGONALITY_TOL);
    let (phi_psi, psi_phi) = pair.resolutions();
    r.record("resolution_phi_psi", (phi_psi - id).max_abs(), BIORTHOGONALITY_TOL);
    r.record("resolution_psi_phi", (psi_phi - id).max_abs(), BIORTHOGONALITY_TOL);
    let eig = eigen_check(pair, l);
    r.record("eigen_l_phi", eig.phi.iter().fold(0.0, |m: f64, &x| m.max(x)), BASIS_TOL);
    r.record("eigen_l_adjoint_psi", eig.psi.iter().fold(0.0, |m: f64, &x| m.max(x)), BASIS_TOL);
    let fwd = metric_map_check(pair, s_phi);
    r.record("metric_map_s_phi", fwd.iter().fold(0.0, |m: f64, &x| m.max(x)), BASIS_TOL);
    let back = metric_map_inverse_check(pair, s_psi);
    r.record("metric_map_s_psi", back.iter().fold(0.0, |m: f64, &x| m.max(x)), BASIS_TOL);
    r.record(
        "s_phi_from_basis",
        scaled_residual(
            &MODES.iter().fold(Matrix4::zeros(), |acc, &(k, n)| acc + pair.phi[k][n].outer(&pair.phi[k][n])),
            s_phi,
            s_phi.frobenius_norm(),
        ),
        BASIS_TOL,
    );
    r
}
