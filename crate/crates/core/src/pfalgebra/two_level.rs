//! One pair of pseudo-fermions on a two-dimensional space.

use crate::error::{Error, Result};
use crate::linalg::{scaled_residual, spectral_norm, sqrtm_spd, symmetric_eigen, Matrix2, Vector2};
use crate::report::VerificationReport;

use super::{ALGEBRA_TOL, BOUND_SLACK};

/// A pair `(a, b)` meant to satisfy `{a, b} = 1`, `a^2 = b^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelPf {
    pub a: Matrix2,
    pub b: Matrix2,
}

/// The ladders, number operator and metric operators of a [`TwoLevelPf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelStructure {
    /// `phi_0` (in the kernel of `a`) and `phi_1 = b phi_0`
    pub phi: [Vector2; 2],
    /// `Psi_0` (in the kernel of `b^T`, scaled so `<phi_0, Psi_0> = 1`) and `Psi_1 = a^T Psi_0`
    pub psi: [Vector2; 2],
    /// `N = b a`
    pub number: Matrix2,
    pub s_phi: Matrix2,
    pub s_psi: Matrix2,
}

fn kernel_vector(m: &Matrix2) -> Vector2 {
    let from_row0 = Vector2::from([m[(0, 1)], -m[(0, 0)]]);
    let from_row1 = Vector2::from([m[(1, 1)], -m[(1, 0)]]);
    if from_row0.norm() >= from_row1.norm() {
        from_row0
    } else {
        from_row1
    }
}

impl TwoLevelPf {
    pub fn new(a: Matrix2, b: Matrix2) -> Self {
        Self { a, b }
    }

    /// `a = D c D^-1`, `b = D c^T D^-1` with `c` the fermionic lowering matrix.
    pub fn from_similarity(d: &Matrix2) -> Result<Self> {
        let c = Matrix2::from_rows([[0.0, 1.0], [0.0, 0.0]]);
        let d_inv = d.inverse()?;
        Ok(Self { a: *d * c * d_inv, b: *d * c.adjoint() * d_inv })
    }

    pub fn structure(&self) -> Result<TwoLevelStructure> {
        let phi0 = kernel_vector(&self.a);
        let psi0_raw = kernel_vector(&self.b.adjoint());
        let overlap = phi0.dot(&psi0_raw);
        if phi0.norm() == 0.0 || !(overlap.abs() > 1e-14 * phi0.norm() * psi0_raw.norm()) {
            return Err(Error::SingularMatrix { determinant: overlap });
        }
        let psi0 = psi0_raw.scale(1.0 / overlap);
        let phi = [phi0, self.b * phi0];
        let psi = [psi0, self.a.adjoint() * psi0];
        let frame = |v: &[Vector2; 2]| v[0].outer(&v[0]) + v[1].outer(&v[1]);
        Ok(TwoLevelStructure {
            phi,
            psi,
            number: self.b * self.a,
            s_phi: frame(&phi),
            s_psi: frame(&psi),
        })
    }

    /// Checks the full list of two-level identities: the deformed
    /// anticommutation rules, ladder actions, number eigenvalues,
    /// biorthonormality, metric bounds and mappings, and the intertwining
    /// and self-adjointness relations.
    pub fn verify(&self) -> Result<VerificationReport> {
        let st = self.structure()?;
        let mut r = VerificationReport::new();
        let id = Matrix2::identity();
        let fro = |m: &Matrix2| m.frobenius_norm();
        let (a, b) = (&self.a, &self.b);
        let bd = b.adjoint();
        let [phi0, phi1] = st.phi;
        let [psi0, psi1] = st.psi;

        let car = (fro(&(*a * *a)) / fro(a).powi(2))
            .max(fro(&(*b * *b)) / fro(b).powi(2))
            .max(scaled_residual(&a.anticommutator(b), &id, fro(a) * fro(b)));
        r.record("pseudo_car", car, ALGEBRA_TOL);

        let vac = ((*a * phi0).norm() / (fro(a) * phi0.norm())).max((bd * psi0).norm() / (fro(b) * psi0.norm()));
        r.record("vacua", vac, ALGEBRA_TOL);

        let lower = ((*a * phi1 - phi0).norm() / phi0.norm()).max((bd * psi1 - psi0).norm() / psi0.norm());
        r.record("lowering", lower, ALGEBRA_TOL);

        let n = st.number;
        let nd = n.adjoint();
        let num = [
            (n * phi0).norm() / phi0.norm(),
            (n * phi1 - phi1).norm() / phi1.norm(),
            (nd * psi0).norm() / psi0.norm(),
            (nd * psi1 - psi1).norm() / psi1.norm(),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        r.record("number_eigenvalues", num, ALGEBRA_TOL);

        let mut gram = 0.0f64;
        for (k, p) in st.phi.iter().enumerate() {
            for (m, q) in st.psi.iter().enumerate() {
                let want = if k == m { 1.0 } else { 0.0 };
                gram = gram.max((p.dot(q) - want).abs());
            }
        }
        r.record("biorthonormality", gram, ALGEBRA_TOL);

        let bound = |s: &Matrix2, v: &[Vector2; 2]| {
            let sum = v[0].dot(&v[0]) + v[1].dot(&v[1]);
            (spectral_norm(s) - sum) / sum
        };
        r.record("s_phi_bound", bound(&st.s_phi, &st.phi), BOUND_SLACK);
        r.record("s_psi_bound", bound(&st.s_psi, &st.psi), BOUND_SLACK);
        for (name, s) in [("s_phi", &st.s_phi), ("s_psi", &st.s_psi)] {
            let margin = match symmetric_eigen(s) {
                Ok(e) => -e.values[0] / e.values[1].abs().max(f64::MIN_POSITIVE),
                Err(_) => f64::NAN,
            };
            r.record(format!("{name}_positive"), margin, 0.0);
        }

        let maps = [
            (st.s_phi * psi0 - phi0).norm() / phi0.norm(),
            (st.s_phi * psi1 - phi1).norm() / phi1.norm(),
            (st.s_psi * phi0 - psi0).norm() / psi0.norm(),
            (st.s_psi * phi1 - psi1).norm() / psi1.norm(),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        r.record("metric_maps", maps, ALGEBRA_TOL);
        r.record(
            "metric_inverse",
            scaled_residual(&(st.s_phi * st.s_psi), &id, fro(&st.s_phi) * fro(&st.s_psi)),
            ALGEBRA_TOL,
        );

        let inter = scaled_residual(&(st.s_psi * n), &(nd * st.s_psi), fro(&st.s_psi) * fro(&n))
            .max(scaled_residual(&(st.s_phi * nd), &(n * st.s_phi), fro(&st.s_phi) * fro(&n)));
        r.record("intertwining", inter, ALGEBRA_TOL);

        let root = sqrtm_spd(&st.s_psi)?;
        let n_hat = root * n * root.inverse()?;
        r.record("n_hat_symmetric", fro(&(n_hat - n_hat.adjoint())) / fro(&n_hat), ALGEBRA_TOL);
        let root_phi = sqrtm_spd(&st.s_phi)?;
        let n_hat_alt = root_phi * nd * root_phi.inverse()?;
        r.record("n_hat_two_routes", scaled_residual(&n_hat, &n_hat_alt, fro(&n_hat)), ALGEBRA_TOL);

        Ok(r)
    }
}
