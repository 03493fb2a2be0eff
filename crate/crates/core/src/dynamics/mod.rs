//! Time evolution of `Psi' = L Psi` and of its companion systems.
//!
//! The authoritative solution is the modal sum over the `phi` basis with
//! coefficients obtained by biorthogonal projection. Everything else here
//! (RK4, the adjoint and `H0` systems, the quartic ODE) checks that solution
//! or reinterprets it.

mod adjoint;
mod printed;
mod quartic;
mod rk4;

pub use adjoint::{
    adjoint_circuit_map, evolve_adjoint, evolve_h0, metric_route_residual, AdjointCircuit, AdjointUnits,
};
pub use printed::{coefficients_printed, explicit_displays, CoefficientComparison, DisplayValues};
pub use quartic::{quartic_residual, QuarticResiduals};
pub use rk4::{evolve_rk4, substeps_for_step, DEFAULT_RK4_STEP};

use serde::{Deserialize, Serialize};

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::linalg::Vector4;
use crate::liouvillian::Spectrum;
use crate::params::CircuitParams;
use crate::pfalgebra::MODES;

pub const DEFAULT_TAU_MAX: f64 = 5.0;
pub const DEFAULT_SAMPLES: usize = 1001;

/// How `tau`-derivatives enter the current relations.
///
/// `OmegaScaled` uses `I = V/R - C omega0 dV/dtau`, which is dimensionally
/// consistent for any `L, C`. `Verbatim` drops the `omega0`. The two agree
/// when `L C = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeConvention {
    #[default]
    OmegaScaled,
    Verbatim,
}

/// Uniform, non-negative sampling of dimensionless time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    tau: Vec<f64>,
}

impl TimeGrid {
    /// `samples` points spanning `[0, tau_max]`.
    pub fn uniform(tau_max: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {samples}")));
        }
        if !(tau_max > 0.0) || !tau_max.is_finite() {
            return Err(Error::InvalidGrid(format!("tau_max must be positive, got {tau_max}")));
        }
        let step = tau_max / (samples - 1) as f64;
        let mut tau: Vec<f64> = (0..samples).map(|i| i as f64 * step).collect();
        tau[samples - 1] = tau_max;
        Ok(Self { tau })
    }

    /// Wraps explicit sample points; they must be non-negative and evenly spaced.
    pub fn from_points(tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::GridEmpty);
        }
        if tau.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidGrid("sample times must be finite and >= 0".into()));
        }
        if tau.len() > 2 {
            let step = tau[1] - tau[0];
            let uneven = tau
                .windows(2)
                .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1e-300));
            if !(step > 0.0) || uneven {
                return Err(Error::InvalidGrid("samples must be increasing and uniform".into()));
            }
        }
        Ok(Self { tau })
    }

    pub fn points(&self) -> &[f64] {
        &self.tau
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn step(&self) -> f64 {
        if self.tau.len() < 2 {
            0.0
        } else {
            self.tau[1] - self.tau[0]
        }
    }
}

/// A sampled solution of some linear system `X' = G X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSeries {
    pub tau: Vec<f64>,
    pub states: Vec<Vector4>,
}

impl StateSeries {
    /// Largest `||a - b|| / max(1, ||a||)` over the common samples.
    pub fn max_relative_deviation(&self, other: &StateSeries) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (*a - *b).norm() / a.norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// The linear current law `I1 = V1/R - c V1'`, `I2 = -V2/R - c V2'`, with
/// `c = C omega0` or `c = C` depending on the convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentLaw {
    pub conductance: f64,
    pub capacitive: f64,
}

impl CurrentLaw {
    pub fn new(params: &CircuitParams, convention: DerivativeConvention) -> Self {
        let omega0 = 1.0 / (params.inductance * params.capacitance).sqrt();
        let capacitive = match convention {
            DerivativeConvention::OmegaScaled => params.capacitance * omega0,
            DerivativeConvention::Verbatim => params.capacitance,
        };
        Self { conductance: 1.0 / params.resistance, capacitive }
    }

    pub fn currents(&self, s: &Vector4) -> (f64, f64) {
        (
            self.conductance * s[0] - self.capacitive * s[2],
            -self.conductance * s[1] - self.capacitive * s[3],
        )
    }
}

/// `Psi(0) = (0, 0, -i1 / c, 0)`: both voltages and `I2` vanish, `I1 = i1`.
pub fn initial_state(i1: f64, params: &CircuitParams, convention: DerivativeConvention) -> Vector4 {
    let law = CurrentLaw::new(params, convention);
    Vector4::from([0.0, 0.0, -i1 / law.capacitive, 0.0])
}

/// Expansion weights of `Psi(0)` in the `phi` basis, indexed `[k][n]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c: [[f64; 2]; 2],
}

impl Coefficients {
    pub fn c11(&self) -> f64 {
        self.c[1][1]
    }

    /// Mode order (0,0), (1,0), (0,1), (1,1).
    pub fn as_array(&self) -> [f64; 4] {
        MODES.map(|(k, n)| self.c[k][n])
    }
}

/// `c_{k,n} = <Psi_{k,n}, Psi(0)>`.
pub fn coefficients(psi0: &Vector4, pair: &BasisPair) -> Coefficients {
    Coefficients { c: pair.expand(psi0) }
}

/// The closed-form solution as a sum of four exponential modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalSolution {
    pub coefficients: Coefficients,
    pub pair: BasisPair,
    pub spectrum: Spectrum,
    /// Returned unchanged at `tau = 0` when known, so boundary values stay exact.
    pub initial: Option<Vector4>,
}

impl ModalSolution {
    pub fn new(psi0: &Vector4, pair: &BasisPair, spectrum: &Spectrum) -> Self {
        Self { coefficients: coefficients(psi0, pair), pair: *pair, spectrum: *spectrum, initial: Some(*psi0) }
    }

    /// `e^{l3 tau} (c00 phi00 + e^{lambda1 tau} c10 phi10 + e^{lambda2 tau} c01 phi01
    ///  + e^{(lambda1 + lambda2) tau} c11 phi11)`
    pub fn state(&self, tau: f64) -> Vector4 {
        if let (0.0, Some(v)) = (tau, self.initial) {
            return v;
        }
        let s = &self.spectrum;
        let c = &self.coefficients.c;
        let p = &self.pair.phi;
        let sum = p[0][0].scale(c[0][0])
            + p[1][0].scale((s.lambda1 * tau).exp() * c[1][0])
            + p[0][1].scale((s.lambda2 * tau).exp() * c[0][1])
            + p[1][1].scale(((s.lambda1 + s.lambda2) * tau).exp() * c[1][1]);
        sum.scale((s.l3 * tau).exp())
    }

    /// The `order`-th `tau`-derivative, differentiating each mode analytically.
    pub fn derivative(&self, tau: f64, order: i32) -> Vector4 {
        self.mode_terms(tau, order).iter().fold(Vector4::zeros(), |acc, v| acc + *v)
    }

    /// The four mode contributions to the `order`-th derivative, in mode order.
    pub fn mode_terms(&self, tau: f64, order: i32) -> [Vector4; 4] {
        MODES.map(|(k, n)| {
            let rate = self.pair.eigenvalue[k][n];
            self.pair.phi[k][n].scale(self.coefficients.c[k][n] * rate.powi(order) * (rate * tau).exp())
        })
    }

    pub fn sample(&self, grid: &TimeGrid) -> Result<StateSeries> {
        if grid.is_empty() {
            return Err(Error::GridEmpty);
        }
        Ok(StateSeries {
            tau: grid.points().to_vec(),
            states: grid.points().iter().map(|&t| self.state(t)).collect(),
        })
    }
}

/// Samples the closed-form solution on `grid`.
pub fn evolve_closed(
    coeffs: &Coefficients,
    pair: &BasisPair,
    spectrum: &Spectrum,
    grid: &TimeGrid,
) -> Result<StateSeries> {
    ModalSolution { coefficients: *coeffs, pair: *pair, spectrum: *spectrum, initial: None }.sample(grid)
}

/// Circuit voltages and currents along a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub tau: Vec<f64>,
    pub state: Vec<Vector4>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub v1_prime: Vec<f64>,
    pub v2_prime: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub law: CurrentLaw,
}

impl Trajectory {
    pub fn from_series(series: &StateSeries, law: CurrentLaw) -> Self {
        let n = series.states.len();
        let mut t = Trajectory {
            tau: series.tau.clone(),
            state: series.states.clone(),
            v1: Vec::with_capacity(n),
            v2: Vec::with_capacity(n),
            v1_prime: Vec::with_capacity(n),
            v2_prime: Vec::with_capacity(n),
            i1: Vec::with_capacity(n),
            i2: Vec::with_capacity(n),
            law,
        };
        for s in &series.states {
            let (i1, i2) = law.currents(s);
            t.v1.push(s[0]);
            t.v2.push(s[1]);
            t.v1_prime.push(s[2]);
            t.v2_prime.push(s[3]);
            t.i1.push(i1);
            t.i2.push(i2);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_bases;
    use crate::linalg::Matrix4;
    use crate::liouvillian::{build_liouvillian, spectrum};
    use crate::params::DerivedParams;
    use crate::pfalgebra::{build_intertwiner, Gauge};

    fn reference(gauge: Gauge) -> (BasisPair, Spectrum, Matrix4) {
        let d = DerivedParams::from_dimensionless(0.5, 3.0);
        let s = spectrum(&d).unwrap();
        let t = build_intertwiner(&s, &d, gauge).unwrap();
        (build_bases(&t.t, &s).unwrap(), s, build_liouvillian(&d).unwrap())
    }

    #[test]
    fn initial_state_conventions() {
        let p = CircuitParams::normalized(0.5, 3.0, 1.0);
        assert_eq!(initial_state(1.0, &p, DerivativeConvention::Verbatim).0, [0.0, 0.0, -1.0, 0.0]);
        assert_eq!(initial_state(0.0, &p, DerivativeConvention::OmegaScaled).0[2], 0.0);
        let p = CircuitParams {
            inductance: 2.0,
            capacitance: 0.5,
            resistance: 1.0,
            mutual_inductance: 1.0,
            initial_current: 2.0,
        };
        assert_eq!(initial_state(2.0, &p, DerivativeConvention::Verbatim).0, [0.0, 0.0, -4.0, 0.0]);
        assert_eq!(initial_state(2.0, &p, DerivativeConvention::OmegaScaled).0, [0.0, 0.0, -4.0, 0.0]);
        // omega0 = 2 here, so the two conventions differ
        let p = CircuitParams { inductance: 0.5, ..p };
        assert_eq!(initial_state(2.0, &p, DerivativeConvention::Verbatim).0[2], -4.0);
        assert_eq!(initial_state(2.0, &p, DerivativeConvention::OmegaScaled).0[2], -2.0);
    }

    #[test]
    fn initial_currents_are_recovered() {
        let p = CircuitParams::normalized(0.5, 3.0, 1.7);
        let law = CurrentLaw::new(&p, DerivativeConvention::OmegaScaled);
        let (i1, i2) = law.currents(&initial_state(1.7, &p, DerivativeConvention::OmegaScaled));
        assert!((i1 - 1.7).abs() < 1e-15);
        assert_eq!(i2, 0.0);
    }

    #[test]
    fn coefficients_of_basis_vector() {
        let (pair, _, _) = reference(Gauge::unit());
        let c = coefficients(&pair.phi[1][1], &pair);
        let want = [0.0, 0.0, 0.0, 1.0];
        for (x, w) in c.as_array().iter().zip(want) {
            assert!((x - w).abs() < 1e-12);
        }
        assert_eq!(coefficients(&Vector4::zeros(), &pair).as_array(), [0.0; 4]);
    }

    #[test]
    fn coefficients_reconstruct_psi0() {
        let (pair, _, _) = reference(Gauge::unit());
        let p = CircuitParams::normalized(0.5, 3.0, 1.0);
        let psi0 = initial_state(1.0, &p, DerivativeConvention::default());
        let c = coefficients(&psi0, &pair);
        assert!((pair.reconstruct(&c.c) - psi0).norm() < 1e-12);
    }

    #[test]
    fn closed_form_at_zero_and_gauge_invariance() {
        let p = CircuitParams::normalized(0.5, 3.0, 1.0);
        let psi0 = initial_state(1.0, &p, DerivativeConvention::default());
        let grid = TimeGrid::uniform(5.0, 201).unwrap();
        let (pair, s, _) = reference(Gauge::unit());
        let a = ModalSolution::new(&psi0, &pair, &s).sample(&grid).unwrap();
        assert!((a.states[0] - psi0).norm() < 1e-12);
        let (pair2, _, _) = reference(Gauge::new([2.0, 0.5, 3.0, 1.0]).unwrap());
        let b = ModalSolution::new(&psi0, &pair2, &s).sample(&grid).unwrap();
        assert!(a.max_relative_deviation(&b) < 1e-10);
    }

    #[test]
    fn analytic_derivative_matches_generator() {
        let p = CircuitParams::normalized(0.5, 3.0, 1.0);
        let psi0 = initial_state(1.0, &p, DerivativeConvention::default());
        let (pair, s, l) = reference(Gauge::unit());
        let sol = ModalSolution::new(&psi0, &pair, &s);
        for tau in [0.0, 0.8, 3.1] {
            let d1 = sol.derivative(tau, 1);
            let want = l * sol.state(tau);
            assert!((d1 - want).norm() < 1e-10 * want.norm().max(1.0));
            assert!((sol.derivative(tau, 0) - sol.state(tau)).norm() < 1e-10 * sol.state(tau).norm().max(1.0));
        }
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(TimeGrid::uniform(5.0, 1), Err(Error::InvalidGrid(_))));
        assert!(matches!(TimeGrid::uniform(0.0, 10), Err(Error::InvalidGrid(_))));
        assert_eq!(TimeGrid::from_points(vec![]), Err(Error::GridEmpty));
        assert!(TimeGrid::from_points(vec![0.0, 0.1, 0.3]).is_err());
        assert!(TimeGrid::from_points(vec![-1.0, 0.0]).is_err());
        let g = TimeGrid::uniform(5.0, 1001).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.points()[1000], 5.0);
        assert!((g.step() - 0.005).abs() < 1e-15);
        assert!(TimeGrid::from_points(g.points().to_vec()).is_ok());
    }

    #[test]
    fn trajectory_layout() {
        let p = CircuitParams::normalized(0.5, 3.0, 1.0);
        let law = CurrentLaw::new(&p, DerivativeConvention::default());
        let (pair, s, _) = reference(Gauge::unit());
        let psi0 = initial_state(1.0, &p, DerivativeConvention::default());
        let series = ModalSolution::new(&psi0, &pair, &s).sample(&TimeGrid::uniform(2.0, 11).unwrap()).unwrap();
        let t = Trajectory::from_series(&series, law);
        for i in 0..t.len() {
            assert_eq!([t.v1[i], t.v2[i], t.v1_prime[i], t.v2_prime[i]], t.state[i].0);
            let i1 = t.v1[i] / p.resistance - p.capacitance * t.v1_prime[i];
            let i2 = -t.v2[i] / p.resistance - p.capacitance * t.v2_prime[i];
            assert!((t.i1[i] - i1).abs() <= 1e-10 * i1.abs().max(1.0));
            assert!((t.i2[i] - i2).abs() <= 1e-10 * i2.abs().max(1.0));
        }
    }
}
