use serde::{Deserialize, Serialize};

use super::{StateSeries, TimeGrid};
use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::linalg::{Matrix4, Vector4};
use crate::liouvillian::Spectrum;
use crate::params::CircuitParams;
use crate::pfalgebra::MODES;

/// Solves `X' = L^T X` as `sum <phi_{k,n}, x0> e^{e_{k,n} tau} Psi_{k,n}`.
pub fn evolve_adjoint(pair: &BasisPair, x0: &Vector4, grid: &TimeGrid) -> Result<StateSeries> {
    if grid.is_empty() {
        return Err(Error::GridEmpty);
    }
    let weights = MODES.map(|(k, n)| pair.phi[k][n].dot(x0));
    let states = grid
        .points()
        .iter()
        .map(|&tau| {
            MODES.iter().zip(weights).fold(Vector4::zeros(), |acc, (&(k, n), w)| {
                acc + pair.psi[k][n].scale(w * (pair.eigenvalue[k][n] * tau).exp())
            })
        })
        .collect();
    Ok(StateSeries { tau: grid.points().to_vec(), states })
}

/// Largest `||eta(tau) - S_psi Psi(tau)|| / max(1, ||eta(tau)||)`, where
/// `S_psi = S_phi^-1`.
pub fn metric_route_residual(psi: &StateSeries, eta: &StateSeries, s_psi: &Matrix4) -> f64 {
    psi.states
        .iter()
        .zip(&eta.states)
        .map(|(p, e)| (*e - *s_psi * *p).norm() / e.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// How the adjoint components are read as circuit quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjointUnits {
    /// `L = C = 1`: `I_j = x_j`, `V_j = -x_{j+2}`.
    #[default]
    Strict,
    /// `L C = 1`: `I_j = x_j`, `V_j = -L x_{j+2}`.
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointCircuit {
    pub tau: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// Largest relative residual of the four circuit relations at each sample.
    pub residual: Vec<f64>,
}

impl AdjointCircuit {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }
}

fn relative(lhs: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(lhs.abs(), |m, t| m.max(t.abs())).max(1.0);
    (lhs - terms.iter().sum::<f64>()).abs() / scale
}

/// Reads an adjoint solution as a circuit and checks it against the circuit
/// relations, using `x' = L^T x` for the time derivatives.
pub fn adjoint_circuit_map(
    series: &StateSeries,
    liouvillian: &Matrix4,
    params: &CircuitParams,
    units: AdjointUnits,
) -> Result<AdjointCircuit> {
    let (l, c, r, m) = (params.inductance, params.capacitance, params.resistance, params.mutual_inductance);
    match units {
        AdjointUnits::Strict if (l - 1.0).abs() > 1e-12 || (c - 1.0).abs() > 1e-12 => {
            return Err(Error::UnitMismatch(format!("strict mode needs L = C = 1, got L = {l}, C = {c}")));
        }
        AdjointUnits::Extended if (l * c - 1.0).abs() > 1e-12 => {
            return Err(Error::UnitMismatch(format!("extended mode needs L C = 1, got {}", l * c)));
        }
        _ => {}
    }
    let lt = liouvillian.adjoint();
    let n = series.states.len();
    let mut out = AdjointCircuit {
        tau: series.tau.clone(),
        i1: Vec::with_capacity(n),
        i2: Vec::with_capacity(n),
        v1: Vec::with_capacity(n),
        v2: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
    };
    for x in &series.states {
        let dx = lt * *x;
        let (i1, i2, v1, v2) = (x[0], x[1], -l * x[2], -l * x[3]);
        let (di1, di2, dv1, dv2) = (dx[0], dx[1], -l * dx[2], -l * dx[3]);
        let res = [
            relative(v1, &[l * di1, m * di2]),
            relative(v2, &[l * di2, m * di1]),
            relative(i1, &[v1 / r, -c * dv1]),
            relative(i2, &[-v2 / r, -c * dv2]),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        out.i1.push(i1);
        out.i2.push(i2);
        out.v1.push(v1);
        out.v2.push(v2);
        out.residual.push(res);
    }
    Ok(out)
}

/// `y(tau) = (y1, e^{lambda1 tau} y2, e^{lambda2 tau} y3, e^{(lambda1+lambda2) tau} y4)`.
pub fn evolve_h0(spectrum: &Spectrum, y0: &Vector4, grid: &TimeGrid) -> Result<StateSeries> {
    if grid.is_empty() {
        return Err(Error::GridEmpty);
    }
    let (l1, l2) = (spectrum.lambda1, spectrum.lambda2);
    let states = grid
        .points()
        .iter()
        .map(|&t| {
            Vector4::from([y0[0], (l1 * t).exp() * y0[1], (l2 * t).exp() * y0[2], ((l1 + l2) * t).exp() * y0[3]])
        })
        .collect();
    Ok(StateSeries { tau: grid.points().to_vec(), states })
}
