//! Heisenberg-like evolution `X(tau) = e^{2 l3 tau} e^{Lt^T tau} X(0) e^{Lt tau}`,
//! where `Lt = L - l3 I = lambda1 N1 + lambda2 N2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::linalg::{expm_taylor, spectral_norm, CMatrix4, Matrix4, Vector4};
use crate::liouvillian::{effective_hamiltonian, Spectrum};
use crate::params::DerivedParams;
use crate::pfalgebra::PfSystem;

/// Slack for declaring `||N_j|| = 1`.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableTrajectory {
    pub tau: Vec<f64>,
    pub x: Vec<Matrix4>,
    /// Spectral norm of each `X(tau)`.
    pub norms: Vec<f64>,
}

/// `e^{Lt tau} = T diag(1, e^{lambda1 tau}, e^{lambda2 tau}, e^{lambda3 tau}) T^-1`.
pub fn shifted_propagator(pf: &PfSystem, tau: f64) -> Matrix4 {
    pf.shifted_diagonalization().exp(tau)
}

/// `X(tau)` for one time; `X(0)` is returned unchanged.
pub fn evolve_at(x0: &Matrix4, pf: &PfSystem, tau: f64) -> Matrix4 {
    if tau == 0.0 {
        return *x0;
    }
    let e = shifted_propagator(pf, tau);
    (e.adjoint() * *x0 * e).scale((2.0 * pf.spectrum.l3 * tau).exp())
}

pub fn evolve_observable(x0: &Matrix4, pf: &PfSystem, grid: &TimeGrid) -> Result<ObservableTrajectory> {
    if grid.is_empty() {
        return Err(Error::GridEmpty);
    }
    let x: Vec<Matrix4> = grid.points().iter().map(|&t| evolve_at(x0, pf, t)).collect();
    let norms = x.iter().map(spectral_norm).collect();
    Ok(ObservableTrajectory { tau: grid.points().to_vec(), x, norms })
}

fn factor(n: &Matrix4, rate: f64, tau: f64) -> Matrix4 {
    Matrix4::identity() + n.scale((rate * tau).exp_m1())
}

fn pair_index(j: usize) -> Result<(usize, usize)> {
    match j {
        1 => Ok((0, 1)),
        2 => Ok((1, 0)),
        _ => Err(Error::PairIndex(j)),
    }
}

fn rates(pf: &PfSystem) -> [f64; 2] {
    [pf.spectrum.lambda1, pf.spectrum.lambda2]
}

/// `N_j(tau)` from `e^{x N} = I + (e^x - 1) N`, keeping the other pair's
/// factors on both sides:
/// `e^{(2 l3 + lambda_j) tau} (I + (e_j - 1) N_j^T)(I + (e_k - 1) N_k^T) N_j (I + (e_k - 1) N_k)`.
pub fn number_closed_form(j: usize, pf: &PfSystem, tau: f64) -> Result<Matrix4> {
    let (p, q) = pair_index(j)?;
    let lam = rates(pf);
    let (np, nq) = (pf.number[p], pf.number[q]);
    if tau == 0.0 {
        return Ok(np);
    }
    let m = factor(&np.adjoint(), lam[p], tau) * factor(&nq.adjoint(), lam[q], tau) * np * factor(&nq, lam[q], tau);
    Ok(m.scale(((2.0 * pf.spectrum.l3 + lam[p]) * tau).exp()))
}

/// The printed arrangement
/// `e^{(2 l3 + lambda_j) tau} (I + (e_j - 1) N_j^T) N_j (I + (e_k - 1)(N_k + N_k^T) + (e_k - 1)^2 N_k^T N_k)`,
/// which moves `N_k^T` past `N_j` although the two do not commute.
pub fn number_printed_form(j: usize, pf: &PfSystem, tau: f64) -> Result<Matrix4> {
    let (p, q) = pair_index(j)?;
    let lam = rates(pf);
    let (np, nq) = (pf.number[p], pf.number[q]);
    let ek = (lam[q] * tau).exp_m1();
    let right = Matrix4::identity() + (nq + nq.adjoint()).scale(ek) + (nq.adjoint() * nq).scale(ek * ek);
    let m = factor(&np.adjoint(), lam[p], tau) * np * right;
    Ok(m.scale(((2.0 * pf.spectrum.l3 + lam[p]) * tau).exp()))
}

fn relative(a: &Matrix4, b: &Matrix4) -> f64 {
    (*a - *b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumberEvolution {
    pub j: usize,
    pub generic: ObservableTrajectory,
    /// `||closed - generic||_F / ||generic||_F` per sample.
    pub closed_deviation: Vec<f64>,
    /// Same for the printed arrangement.
    pub printed_deviation: Vec<f64>,
}

impl NumberEvolution {
    pub fn max_closed_deviation(&self) -> f64 {
        self.closed_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_printed_deviation(&self) -> f64 {
        self.printed_deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Evolves `N_j` through the generic propagator and compares both product forms against it.
pub fn number_evolution(j: usize, pf: &PfSystem, grid: &TimeGrid) -> Result<NumberEvolution> {
    let (p, _) = pair_index(j)?;
    let generic = evolve_observable(&pf.number[p], pf, grid)?;
    let mut closed_deviation = Vec::with_capacity(grid.len());
    let mut printed_deviation = Vec::with_capacity(grid.len());
    for (&tau, x) in grid.points().iter().zip(&generic.x) {
        closed_deviation.push(relative(&number_closed_form(j, pf, tau)?, x));
        printed_deviation.push(relative(&number_printed_form(j, pf, tau)?, x));
    }
    Ok(NumberEvolution { j, generic, closed_deviation, printed_deviation })
}

/// `||e^{a N} - (I + (e^a - 1) N)||_F / ||e^{a N}||_F` with the left side
/// from a Taylor-summed exponential.
pub fn expansion_residual(n: &Matrix4, a: f64) -> f64 {
    relative(&factor(n, a, 1.0), &expm_taylor(n, a))
}

/// `e^{Lt tau}` (Taylor-summed) against `(I + (e_1 - 1) N1)(I + (e_2 - 1) N2)`.
pub fn product_formula_residual(pf: &PfSystem, tau: f64) -> f64 {
    let lam = rates(pf);
    let product = factor(&pf.number[0], lam[0], tau) * factor(&pf.number[1], lam[1], tau);
    relative(&product, &expm_taylor(&pf.shifted(), tau))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub tau: Vec<f64>,
    /// `||N_j(tau)|| e^{2 l3 tau}`
    pub ratio: [Vec<f64>; 2],
    pub norm_n: [Vec<f64>; 2],
    /// `sup ratio_j / ||N_j(0)||` over the grid.
    pub constant: [f64; 2],
    pub initial_norm: [f64; 2],
    /// Whether `||N_j(0)|| = 1` within [`UNIT_NORM_TOL`].
    pub unit_norm_premise: [bool; 2],
    /// Every ratio is finite and at most `constant_j ||N_j(0)||`.
    pub bounded: bool,
}

pub fn growth_bound_report(n1: &ObservableTrajectory, n2: &ObservableTrajectory, spectrum: &Spectrum) -> GrowthReport {
    let trajs = [n1, n2];
    let ratio = trajs.map(|t| {
        t.tau
            .iter()
            .zip(&t.norms)
            .map(|(&tau, &n)| n * (2.0 * spectrum.l3 * tau).exp())
            .collect::<Vec<f64>>()
    });
    let initial_norm = trajs.map(|t| t.norms.first().copied().unwrap_or(f64::NAN));
    let constant = [0, 1].map(|j| ratio[j].iter().copied().fold(0.0, f64::max) / initial_norm[j]);
    let bounded = (0..2).all(|j| {
        constant[j].is_finite()
            && ratio[j].iter().all(|r| r.is_finite() && *r <= constant[j] * initial_norm[j] * (1.0 + 1e-12))
    });
    GrowthReport {
        tau: n1.tau.clone(),
        ratio,
        norm_n: trajs.map(|t| t.norms.clone()),
        constant,
        initial_norm,
        unit_norm_premise: initial_norm.map(|n| (n - 1.0).abs() < UNIT_NORM_TOL),
        bounded,
    }
}

/// `|<Phi(0), X(tau) Phi(0)> - <Phi(tau), X(0) Phi(tau)>| / (||X(0)||_F ||Phi(tau)||^2)`
/// with `Phi(tau) = e^{L tau} Phi(0)` from a Taylor-summed exponential.
pub fn expectation_residual(x0: &Matrix4, phi0: &Vector4, pf: &PfSystem, tau: f64) -> f64 {
    let lhs = phi0.dot(&(evolve_at(x0, pf, tau) * *phi0));
    let phi = expm_taylor(&pf.liouvillian, tau) * *phi0;
    let rhs = phi.dot(&(*x0 * phi));
    (lhs - rhs).abs() / (x0.frobenius_norm() * phi.dot(&phi)).max(f64::MIN_POSITIVE)
}

/// Builds `e^{i H^dag tau} X e^{-i H tau}` in complex arithmetic with `H = i L`
/// and compares it with the real evolution. Returns the relative deviation
/// and the largest imaginary part.
pub fn hamiltonian_convention_residual(x0: &Matrix4, d: &DerivedParams, pf: &PfSystem, tau: f64) -> (f64, f64) {
    let h = effective_hamiltonian(d);
    let i = Complex64::new(0.0, 1.0);
    let left = h.adjoint().scale(i).expm(tau);
    let right = h.scale(-i).expm(tau);
    let (re, im) = (left * CMatrix4::from_real(x0) * right).real_part();
    (relative(&re, &evolve_at(x0, pf, tau)), im / re.max_abs().max(f64::MIN_POSITIVE))
}
