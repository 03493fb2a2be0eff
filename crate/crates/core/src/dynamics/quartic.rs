use serde::Serialize;

use super::{ModalSolution, TimeGrid};
use crate::params::DerivedParams;

/// Per-sample residuals of `v'''' + (2 alpha - gamma^2) v'' + alpha^2 (1 - mu^2) v = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarticResiduals {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl QuarticResiduals {
    pub fn max(&self) -> f64 {
        self.v1.iter().chain(&self.v2).copied().fold(0.0, f64::max)
    }
}

/// Evaluates the fourth-order voltage equation with analytic derivatives of
/// the mode sum, relative to the largest single term at each sample.
pub fn quartic_residual(sol: &ModalSolution, d: &DerivedParams, grid: &TimeGrid) -> QuarticResiduals {
    let b = 2.0 * d.alpha - d.gamma * d.gamma;
    let c = d.alpha * d.alpha * (1.0 - d.mu * d.mu);
    let mut out = QuarticResiduals { v1: Vec::with_capacity(grid.len()), v2: Vec::with_capacity(grid.len()) };
    for &tau in grid.points() {
        let d0 = sol.mode_terms(tau, 0);
        let d2 = sol.mode_terms(tau, 2);
        let d4 = sol.mode_terms(tau, 4);
        for (comp, sink) in [(0usize, &mut out.v1), (1usize, &mut out.v2)] {
            let mut sum = 0.0;
            let mut largest = 0.0f64;
            for j in 0..4 {
                for term in [d4[j][comp], b * d2[j][comp], c * d0[j][comp]] {
                    sum += term;
                    largest = largest.max(term.abs());
                }
            }
            sink.push(if largest > 0.0 { sum.abs() / largest } else { 0.0 });
        }
    }
    out
}
