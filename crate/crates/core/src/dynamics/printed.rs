//! The printed coefficient, voltage and current formulas, kept as an
//! independent reading of the closed-form solution.

use serde::Serialize;

use super::{Coefficients, CurrentLaw};
use crate::error::{Error, Result};
use crate::liouvillian::Spectrum;
use crate::params::CircuitParams;
use crate::pfalgebra::Gauge;

/// Printed coefficients next to the projected ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientComparison {
    pub printed: Coefficients,
    pub projection: Coefficients,
    pub sigma: f64,
    /// `max |printed - projection| / max |projection|`, or the absolute
    /// deviation when every projected coefficient vanishes.
    pub deviation: f64,
    /// Least-squares factor `k` minimising `|printed - k projection|`.
    pub common_ratio: f64,
}

/// Evaluates the printed `c_{k,n}` and `sigma` formulas as written.
///
/// The unmatched opening parenthesis in `sigma` is closed at the end of the
/// bracket, and `i1` multiplies only the terms it is printed against.
pub fn coefficients_printed(
    params: &CircuitParams,
    spectrum: &Spectrum,
    deltas: &[f64; 4],
    gauge: &Gauge,
    projection: &Coefficients,
) -> Result<CoefficientComparison> {
    let [d1, d2, d3, d4] = *deltas;
    let [t1, t2, t3, t4] = gauge.as_array();
    let (l2, l4) = (spectrum.l2, spectrum.l4);
    let i1 = params.initial_current;

    let inner = d2 * d3 + d1 * (d2 + d3 - 2.0 * d4) + d2 * d4 + d3 * d4;
    let sigma = params.capacitance
        * ((l4 * l4 + l2 * l2) * (d2 - d3) * d1 * d4 - 2.0 * l4 * l2 * (-2.0 * inner));
    if !(sigma.abs() >= 1e-12) {
        return Err(Error::ZeroSigma(sigma));
    }

    let c00 = -(-l4 * (d2 - d3) + l2 * (d2 + d3 - 2.0 * d4) * i1) / (sigma * t1);
    let c10 = -(-l2 * (d1 - d4) + l4 * (d1 + d4 - 2.0 * d3) * i1) / (sigma * t2);
    let c01 = (l2 * (d1 - d4) + l4 * (d1 + d4 - 2.0 * d2) * i1) / (sigma * t3);
    let c11 = (l4 * (d2 - d3) + l2 * (d2 + d3 - 2.0 * d1) * i1) / (sigma * t4);
    let printed = Coefficients { c: [[c00, c01], [c10, c11]] };

    let p = printed.as_array();
    let q = projection.as_array();
    let scale = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = p.iter().zip(&q).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let deviation = if scale > 0.0 { diff / scale } else { diff };
    let qq: f64 = q.iter().map(|x| x * x).sum();
    let common_ratio = if qq > 0.0 { p.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() / qq } else { f64::NAN };
    Ok(CoefficientComparison { printed, projection: *projection, sigma, deviation, common_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplayValues {
    pub v1: f64,
    pub v2: f64,
    pub i1: f64,
    pub i2: f64,
}

/// `V_j(tau)` and `I_j(tau)` written mode by mode in terms of `delta`, the
/// gauge and the rates `l2`, `l4`.
pub fn explicit_displays(
    coeffs: &Coefficients,
    spectrum: &Spectrum,
    deltas: &[f64; 4],
    gauge: &Gauge,
    law: &CurrentLaw,
    tau: f64,
) -> DisplayValues {
    let c = &coeffs.c;
    let [d1, d2, d3, d4] = *deltas;
    let [t1, t2, t3, t4] = gauge.as_array();
    let (l2, l4) = (spectrum.l2, spectrum.l4);
    let g = law.conductance;
    let cap = law.capacitive;
    let e0 = (spectrum.l3 * tau).exp();
    let e1 = (spectrum.lambda1 * tau).exp();
    let e2 = (spectrum.lambda2 * tau).exp();
    let e12 = ((spectrum.lambda1 + spectrum.lambda2) * tau).exp();

    let w = [c[0][0] * t1, e1 * c[1][0] * t2, e2 * c[0][1] * t3, e12 * c[1][1] * t4];
    let v1 = e0 * (w[0] * d1 + w[1] * d2 + w[2] * d3 + w[3] * d4);
    let v2 = e0 * (w[0] + w[1] + w[2] + w[3]);
    let i1 = e0
        * (w[0] * d1 * (g + cap * l4)
            + w[1] * d2 * (g + cap * l2)
            + w[2] * d3 * (g - cap * l2)
            + w[3] * d4 * (g - cap * l4));
    let i2 = e0
        * (w[0] * (-g + cap * l4) + w[1] * (-g + cap * l2) + w[2] * (-g - cap * l2) + w[3] * (-g - cap * l4));
    DisplayValues { v1, v2, i1, i2 }
}
