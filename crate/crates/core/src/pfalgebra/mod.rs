//! Fermionic reference structure, the intertwiner `T`, and the two pairs of
//! pseudo-fermionic operators it induces.
//!
//! The shifted Liouvillian `L - l3 I` is similar to the diagonal `H0` through
//! `T`, whose columns are eigenvectors of `L`. Conjugating the fermionic
//! lowering matrices `A_j` by `T` gives `a_j = T A_j T^-1`, `b_j = T A_j^T T^-1`,
//! which obey the deformed anticommutation rules with `b_j != a_j^T`.

mod two_level;

pub use two_level::{TwoLevelPf, TwoLevelStructure};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, scaled_residual, spectral_norm, sqrtm_spd, symmetric_eigen, Diagonalization,
    Matrix4, Vector4,
};
use crate::liouvillian::{shift, Spectrum};
use crate::params::DerivedParams;
use crate::report::VerificationReport;

/// Tolerance for every norm-scaled algebraic identity.
pub const ALGEBRA_TOL: f64 = 1e-9;
/// Slack for the `||S|| <= sum ||v||^2` bounds.
pub const BOUND_SLACK: f64 = 1e-12;

const GAUGE_MIN: f64 = 1e-12;

/// Free column scales `t21..t24` of the intertwiner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub t21: f64,
    pub t22: f64,
    pub t23: f64,
    pub t24: f64,
}

impl Gauge {
    pub fn new(t: [f64; 4]) -> Result<Self> {
        let g = Self { t21: t[0], t22: t[1], t23: t[2], t24: t[3] };
        g.check()?;
        Ok(g)
    }

    pub fn unit() -> Self {
        Self { t21: 1.0, t22: 1.0, t23: 1.0, t24: 1.0 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t21, self.t22, self.t23, self.t24]
    }

    pub fn check(&self) -> Result<()> {
        for (i, t) in self.as_array().into_iter().enumerate() {
            if !(t.abs() > GAUGE_MIN) {
                return Err(Error::GaugeDegenerate { index: i + 1, value: t });
            }
        }
        Ok(())
    }
}

impl Default for Gauge {
    fn default() -> Self {
        Self::unit()
    }
}

/// The fermionic lowering matrices `(A1, A2)`.
pub fn fermion_generators() -> (Matrix4, Matrix4) {
    let a1 = Matrix4::from_rows([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0, 0.0],
    ]);
    let a2 = Matrix4::from_rows([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ]);
    (a1, a2)
}

/// Column index of mode `(k, n)`: (0,0)->0, (1,0)->1, (0,1)->2, (1,1)->3.
pub const fn mode_index(k: usize, n: usize) -> usize {
    k + 2 * n
}

/// Modes in column order.
pub const MODES: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Orthonormal eigenvector `Phi_{k,n}` of `H0`.
pub fn canonical_basis(k: usize, n: usize) -> Vector4 {
    Vector4::unit(mode_index(k, n))
}

/// `H0 = lambda1 A1^T A1 + lambda2 A2^T A2`.
pub fn build_h0(spectrum: &Spectrum) -> Matrix4 {
    let (a1, a2) = fermion_generators();
    (a1.adjoint() * a1).scale(spectrum.lambda1) + (a2.adjoint() * a2).scale(spectrum.lambda2)
}

/// The intertwiner `T` with `(L - l3 I) T = T H0`, and the `delta_2j` that fill its first row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intertwiner {
    pub t: Matrix4,
    pub deltas: [f64; 4],
    pub gauge: Gauge,
}

/// The four `delta_2j`, ratios of the `V1` and `V2` components of each eigenvector.
pub fn deltas(spectrum: &Spectrum, d: &DerivedParams) -> Result<[f64; 4]> {
    if d.mu == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let g2 = d.gamma * d.gamma;
    let root = spectrum.rho.sqrt();
    let denom = 2.0 * d.alpha * d.mu;
    Ok([
        (g2 + root - 2.0 * d.gamma * spectrum.l4) / denom,
        (g2 - root - 2.0 * d.gamma * spectrum.l2) / denom,
        (g2 - root + 2.0 * d.gamma * spectrum.l2) / denom,
        (g2 + root + 2.0 * d.gamma * spectrum.l4) / denom,
    ])
}

pub fn build_intertwiner(spectrum: &Spectrum, d: &DerivedParams, gauge: Gauge) -> Result<Intertwiner> {
    gauge.check()?;
    let deltas = deltas(spectrum, d)?;
    let scales = gauge.as_array();
    let rates = spectrum.mode_rates();
    let mut t = Matrix4::zeros();
    for j in 0..4 {
        t[(0, j)] = deltas[j] * scales[j];
        t[(1, j)] = scales[j];
        t[(2, j)] = rates[j] * deltas[j] * scales[j];
        t[(3, j)] = rates[j] * scales[j];
    }
    Ok(Intertwiner { t, deltas, gauge })
}

/// Closed form `det T = -(4 rho l4 l2 / (alpha^2 mu^2)) t21 t22 t23 t24`.
pub fn intertwiner_determinant(spectrum: &Spectrum, d: &DerivedParams, gauge: &Gauge) -> f64 {
    let t = gauge.as_array();
    -4.0 * spectrum.rho * spectrum.l4 * spectrum.l2 / (d.alpha * d.alpha * d.mu * d.mu)
        * t.iter().product::<f64>()
}

/// Everything derived from one intertwiner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfSystem {
    pub liouvillian: Matrix4,
    pub spectrum: Spectrum,
    pub t: Matrix4,
    pub t_inv: Matrix4,
    pub deltas: [f64; 4],
    pub h0: Matrix4,
    /// `a_j = T A_j T^-1`
    pub a: [Matrix4; 2],
    /// `b_j = T A_j^T T^-1`
    pub b: [Matrix4; 2],
    /// `N_j = b_j a_j`; their adjoints are formed on demand.
    pub number: [Matrix4; 2],
    /// `S_phi = T T^T`
    pub s_phi: Matrix4,
    /// `S_psi = (T^T)^-1 T^-1`
    pub s_psi: Matrix4,
    /// `S_psi^{1/2} N_j S_psi^{-1/2}`
    pub n_hat: [Matrix4; 2],
}

pub fn build_pf(intertwiner: &Intertwiner, spectrum: &Spectrum, liouvillian: &Matrix4) -> Result<PfSystem> {
    let t = intertwiner.t;
    let t_inv = t.inverse()?;
    let (a1, a2) = fermion_generators();
    let a = [t * a1 * t_inv, t * a2 * t_inv];
    let b = [t * a1.adjoint() * t_inv, t * a2.adjoint() * t_inv];
    let number = [b[0] * a[0], b[1] * a[1]];
    let s_phi = t * t.adjoint();
    let s_psi = t_inv.adjoint() * t_inv;
    let root = sqrtm_spd(&s_psi)?;
    let root_inv = root.inverse()?;
    let n_hat = number.map(|n| root * n * root_inv);
    Ok(PfSystem {
        liouvillian: *liouvillian,
        spectrum: *spectrum,
        t,
        t_inv,
        deltas: intertwiner.deltas,
        h0: build_h0(spectrum),
        a,
        b,
        number,
        s_phi,
        s_psi,
        n_hat,
    })
}

impl PfSystem {
    /// `L - l3 I`
    pub fn shifted(&self) -> Matrix4 {
        shift(&self.liouvillian, &self.spectrum)
    }

    /// `L - l3 I = T diag(0, lambda1, lambda2, lambda1 + lambda2) T^-1`.
    pub fn shifted_diagonalization(&self) -> Diagonalization<4> {
        Diagonalization { t: self.t, t_inv: self.t_inv, rates: self.spectrum.shifted_rates() }
    }

    /// `L = T diag(l3, l1, l2, l4) T^-1`.
    pub fn diagonalization(&self) -> Diagonalization<4> {
        Diagonalization { t: self.t, t_inv: self.t_inv, rates: self.spectrum.mode_rates() }
    }

    /// `phi_{k,n} = T Phi_{k,n}`
    pub fn phi(&self, k: usize, n: usize) -> Vector4 {
        self.t.column(mode_index(k, n))
    }

    /// `Psi_{k,n} = (T^-1)^T Phi_{k,n}`
    pub fn psi(&self, k: usize, n: usize) -> Vector4 {
        self.t_inv.row(mode_index(k, n))
    }
}

fn rel(v: &Vector4, scale: f64) -> f64 {
    v.norm() / scale.max(f64::MIN_POSITIVE)
}

/// Quadratic-form bound `||S|| <= sum ||v||^2`, as `(||S|| - sum) / sum`.
fn bound_margin(s: &Matrix4, vectors: &[Vector4]) -> f64 {
    let sum: f64 = vectors.iter().map(|v| v.dot(v)).sum();
    (spectral_norm(s) - sum) / sum
}

/// Runs every pseudo-fermion axiom against `sys` and reports the residuals.
///
/// Mixed-adjoint anticommutators such as `{a_1, b_2^T}` do not vanish for a
/// non-orthogonal `T`; their size is recorded as a note, not a check.
pub fn pf_verify(sys: &PfSystem) -> VerificationReport {
    let mut r = VerificationReport::new();
    let id = Matrix4::identity();
    let fro = |m: &Matrix4| m.frobenius_norm();
    let anti = |x: &Matrix4, y: &Matrix4| scaled_residual(&x.anticommutator(y), &Matrix4::zeros(), fro(x) * fro(y));

    let lt = sys.shifted();
    r.record(
        "intertwining_shifted",
        (lt * sys.t - sys.t * sys.h0).frobenius_norm() / (fro(&sys.t) * fro(&lt)),
        ALGEBRA_TOL,
    );

    for j in 0..2 {
        let (a, b) = (&sys.a[j], &sys.b[j]);
        let a_sq = fro(&(*a * *a)) / fro(a).powi(2);
        let b_sq = fro(&(*b * *b)) / fro(b).powi(2);
        let ab = scaled_residual(&a.anticommutator(b), &id, fro(a) * fro(b));
        r.record(format!("pseudo_car_{}", j + 1), a_sq.max(b_sq).max(ab), ALGEBRA_TOL);
    }

    let (a, b) = (&sys.a, &sys.b);
    let mut cross = 0.0f64;
    let mut mixed = 0.0f64;
    for (j, k) in [(0, 1), (1, 0)] {
        cross = cross
            .max(anti(&a[j], &b[k]))
            .max(anti(&a[j].adjoint(), &b[k].adjoint()))
            .max(anti(&a[j], &a[k]))
            .max(anti(&b[j], &b[k]));
        mixed = mixed
            .max(anti(&a[j], &b[k].adjoint()))
            .max(anti(&a[j].adjoint(), &b[k]));
    }
    r.record("cross_pair_independence", cross, ALGEBRA_TOL);
    r.notes.insert("cross_pair_mixed_adjoint".into(), mixed);

    let [n1, n2] = sys.number;
    for (j, n) in sys.number.iter().enumerate() {
        r.record(
            format!("number_idempotent_{}", j + 1),
            fro(&(*n * *n - *n)) / fro(n).powi(2),
            ALGEBRA_TOL,
        );
    }
    r.record("number_commute", fro(&n1.commutator(&n2)) / (fro(&n1) * fro(&n2)), ALGEBRA_TOL);

    let mut eig_res = 0.0f64;
    for (k, n) in MODES {
        let phi = sys.phi(k, n);
        eig_res = eig_res
            .max(rel(&(n1 * phi - phi.scale(k as f64)), phi.norm()))
            .max(rel(&(n2 * phi - phi.scale(n as f64)), phi.norm()));
    }
    r.record("number_eigenvectors", eig_res, ALGEBRA_TOL);

    let s = &sys.spectrum;
    let rebuilt = n1.scale(s.lambda1) + n2.scale(s.lambda2) + id.scale(s.l3);
    r.record(
        "liouvillian_reconstruction",
        scaled_residual(&rebuilt, &sys.liouvillian, fro(&sys.liouvillian)),
        ALGEBRA_TOL,
    );

    let phis = MODES.map(|(k, n)| sys.phi(k, n));
    let psis = MODES.map(|(k, n)| sys.psi(k, n));
    let frame_phi = phis.iter().fold(Matrix4::zeros(), |acc, v| acc + v.outer(v));
    let frame_psi = psis.iter().fold(Matrix4::zeros(), |acc, v| acc + v.outer(v));
    r.record(
        "s_phi_factorization",
        scaled_residual(&frame_phi, &sys.s_phi, fro(&sys.s_phi)),
        ALGEBRA_TOL,
    );
    r.record(
        "s_psi_factorization",
        scaled_residual(&frame_psi, &sys.s_psi, fro(&sys.s_psi)),
        ALGEBRA_TOL,
    );
    r.record(
        "s_phi_s_psi_inverse",
        scaled_residual(&(sys.s_phi * sys.s_psi), &id, fro(&sys.s_phi) * fro(&sys.s_psi)),
        ALGEBRA_TOL,
    );
    for (name, m) in [("s_phi", &sys.s_phi), ("s_psi", &sys.s_psi)] {
        let margin = match symmetric_eigen(m) {
            Ok(e) => -e.values[0] / e.values[3].abs().max(f64::MIN_POSITIVE),
            Err(_) => f64::NAN,
        };
        // passes iff the smallest eigenvalue is strictly positive
        r.record(format!("{name}_positive"), margin, 0.0);
        r.record(format!("{name}_symmetric"), m.asymmetry() / m.max_abs(), ALGEBRA_TOL);
    }
    r.record("s_phi_bound", bound_margin(&sys.s_phi, &phis), BOUND_SLACK);
    r.record("s_psi_bound", bound_margin(&sys.s_psi, &psis), BOUND_SLACK);

    let mut inter = 0.0f64;
    for n in &sys.number {
        let nd = n.adjoint();
        inter = inter
            .max(scaled_residual(&(sys.s_psi * *n), &(nd * sys.s_psi), fro(&sys.s_psi) * fro(n)))
            .max(scaled_residual(&(sys.s_phi * nd), &(*n * sys.s_phi), fro(&sys.s_phi) * fro(n)));
    }
    r.record("metric_intertwining", inter, ALGEBRA_TOL);

    let l = &sys.liouvillian;
    r.record(
        "crypto_hermiticity",
        scaled_residual(&(*l * sys.s_phi), &(sys.s_phi * l.adjoint()), fro(l) * fro(&sys.s_phi)),
        ALGEBRA_TOL,
    );

    for (j, h) in sys.n_hat.iter().enumerate() {
        r.record(format!("n_hat_symmetric_{}", j + 1), fro(&(*h - h.adjoint())) / fro(h), ALGEBRA_TOL);
        let spec_res = match symmetric_eigen(h) {
            Ok(e) => e
                .values
                .iter()
                .zip([0.0, 0.0, 1.0, 1.0])
                .fold(0.0f64, |m, (x, want)| m.max((x - want).abs())),
            Err(_) => f64::NAN,
        };
        r.record(format!("n_hat_spectrum_{}", j + 1), spec_res, ALGEBRA_TOL);
    }

    r.condition_number = Some(condition_number(&sys.t));
    r.notes.insert("t_condition_number".into(), condition_number(&sys.t));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{build_liouvillian, spectrum};

    fn system(gauge: Gauge) -> PfSystem {
        let d = DerivedParams::from_dimensionless(0.5, 3.0);
        let s = spectrum(&d).unwrap();
        let l = build_liouvillian(&d).unwrap();
        let t = build_intertwiner(&s, &d, gauge).unwrap();
        build_pf(&t, &s, &l).unwrap()
    }

    #[test]
    fn generators_obey_car() {
        let (a1, a2) = fermion_generators();
        let id = Matrix4::identity();
        assert_eq!(a1 * a1, Matrix4::zeros());
        assert_eq!(a2 * a2, Matrix4::zeros());
        assert_eq!(a1.anticommutator(&a1.adjoint()), id);
        assert_eq!(a2.anticommutator(&a2.adjoint()), id);
        assert_eq!(a1.anticommutator(&a2.adjoint()), Matrix4::zeros());
        assert_eq!(a1.anticommutator(&a2), Matrix4::zeros());
    }

    #[test]
    fn generator_adjoint_moves_entries_below_diagonal() {
        let (a1, _) = fermion_generators();
        let d = a1.adjoint();
        assert_eq!((d[(1, 0)], d[(3, 2)], d[(0, 1)], d[(2, 3)]), (1.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn h0_is_diagonal_with_mode_energies() {
        let s = spectrum(&DerivedParams::from_dimensionless(0.5, 3.0)).unwrap();
        let h0 = build_h0(&s);
        assert_eq!(h0, Matrix4::diag([0.0, s.lambda1, s.lambda2, s.lambda1 + s.lambda2]));
        assert_eq!(h0.adjoint(), h0);
        let (a1, a2) = fermion_generators();
        assert_eq!(a1.adjoint() * canonical_basis(0, 0), canonical_basis(1, 0));
        assert_eq!(a2.adjoint() * canonical_basis(0, 0), canonical_basis(0, 1));
        assert_eq!(a1.adjoint() * (a2.adjoint() * canonical_basis(0, 0)), canonical_basis(1, 1));
        for (k, n) in MODES {
            let phi = canonical_basis(k, n);
            let want = phi.scale(k as f64 * s.lambda1 + n as f64 * s.lambda2);
            assert!((h0 * phi - want).norm() < 1e-15);
        }
    }

    #[test]
    fn columns_are_eigenvectors_of_l() {
        let sys = system(Gauge::unit());
        let rates = sys.spectrum.mode_rates();
        for j in 0..4 {
            let v = sys.t.column(j);
            let res = (sys.liouvillian * v - v.scale(rates[j])).norm() / v.norm();
            assert!(res < 1e-9, "column {j}: {res}");
        }
    }

    #[test]
    fn determinant_closed_form() {
        let d = DerivedParams::from_dimensionless(0.5, 3.0);
        let s = spectrum(&d).unwrap();
        for g in [[1.0, 1.0, 1.0, 1.0], [2.0, 0.5, 3.0, 1.0], [-1.0, 0.7, 1.3, -2.0]] {
            let gauge = Gauge::new(g).unwrap();
            let t = build_intertwiner(&s, &d, gauge).unwrap();
            let want = intertwiner_determinant(&s, &d, &gauge);
            assert!(((t.t.determinant() - want) / want).abs() < 1e-9);
        }
    }

    #[test]
    fn gauge_scales_columns() {
        let d = DerivedParams::from_dimensionless(0.5, 3.0);
        let s = spectrum(&d).unwrap();
        let base = build_intertwiner(&s, &d, Gauge::unit()).unwrap().t;
        let g = [2.0, 0.5, 3.0, 1.0];
        let scaled = build_intertwiner(&s, &d, Gauge::new(g).unwrap()).unwrap().t;
        assert_eq!(scaled, base * Matrix4::diag(g));
    }

    #[test]
    fn intertwiner_errors() {
        let d0 = DerivedParams::from_dimensionless(0.0, 3.0);
        let s0 = spectrum(&d0).unwrap();
        assert_eq!(build_intertwiner(&s0, &d0, Gauge::unit()), Err(Error::ZeroCoupling));
        assert!(matches!(
            Gauge::new([1.0, 0.0, 1.0, 1.0]),
            Err(Error::GaugeDegenerate { index: 2, .. })
        ));
        let bad = Gauge { t21: 1.0, t22: 1.0, t23: 1.0, t24: 0.0 };
        let d = DerivedParams::from_dimensionless(0.5, 3.0);
        let s = spectrum(&d).unwrap();
        assert!(matches!(build_intertwiner(&s, &d, bad), Err(Error::GaugeDegenerate { index: 4, .. })));
    }

    #[test]
    fn reference_delta_spread() {
        let sys = system(Gauge::unit());
        let ratio = sys.deltas[3] / sys.deltas[0];
        assert!(ratio > 400.0 && ratio < 600.0, "{ratio}");
    }

    #[test]
    fn number_operators() {
        let sys = system(Gauge::unit());
        let [n1, n2] = sys.number;
        assert!((n1 * n1 - n1).max_abs() < 1e-10);
        assert!((n2 * n2 - n2).max_abs() < 1e-10);
        assert!(n1.commutator(&n2).max_abs() < 1e-10);
        let s = sys.spectrum;
        let rebuilt = n1.scale(s.lambda1) + n2.scale(s.lambda2) + Matrix4::identity().scale(s.l3);
        assert!((rebuilt - sys.liouvillian).frobenius_norm() < 1e-9 * sys.liouvillian.frobenius_norm());
    }

    #[test]
    fn reference_axioms_pass() {
        for g in [Gauge::unit(), Gauge::new([2.0, 0.5, 3.0, 1.0]).unwrap()] {
            let r = pf_verify(&system(g));
            let failing: Vec<_> = r.failures().collect();
            assert!(failing.is_empty(), "{failing:?}");
            assert!(r.condition_number.unwrap() > 1.0);
        }
    }

    #[test]
    fn mixed_adjoint_anticommutators_do_not_vanish() {
        let r = pf_verify(&system(Gauge::unit()));
        assert!(r.notes["cross_pair_mixed_adjoint"] > 1e-3);
    }

    #[test]
    fn fault_injection_is_localised() {
        let d = DerivedParams::from_dimensionless(0.5, 3.0);
        let s = spectrum(&d).unwrap();
        let l = build_liouvillian(&d).unwrap();
        let mut t = build_intertwiner(&s, &d, Gauge::unit()).unwrap();
        t.t[(2, 1)] += 1e-3;
        let r = pf_verify(&build_pf(&t, &s, &l).unwrap());
        let broken: Vec<_> = r.failures().map(|(k, _)| k).collect();
        assert!(broken.contains(&"liouvillian_reconstruction"), "{broken:?}");
        assert!(broken.contains(&"crypto_hermiticity"));
        assert!(broken.contains(&"intertwining_shifted"));
        // conjugation by any invertible matrix keeps the algebra intact
        assert!(r.get("pseudo_car_1").unwrap().pass);
        assert!(r.get("number_commute").unwrap().pass);
    }

    #[test]
    fn n_hat_is_symmetric_with_binary_spectrum() {
        let sys = system(Gauge::unit());
        for h in sys.n_hat {
            assert!(h.asymmetry() < 1e-9 * h.max_abs());
            let e = symmetric_eigen(&h).unwrap();
            for (x, want) in e.values.iter().zip([0.0, 0.0, 1.0, 1.0]) {
                assert!((x - want).abs() < 1e-9);
            }
        }
    }
}
