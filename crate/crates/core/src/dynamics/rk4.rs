use super::{StateSeries, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{Matrix4, Vector4};

pub const DEFAULT_RK4_STEP: f64 = 1e-3;

/// Number of RK4 substeps per grid interval so that the step does not exceed `h`.
pub fn substeps_for_step(grid: &TimeGrid, h: f64) -> usize {
    ((grid.step() / h).ceil() as usize).max(1)
}

/// Classical fourth-order Runge–Kutta for `Psi' = L Psi`, with `substeps`
/// equal steps between consecutive grid points.
pub fn evolve_rk4(l: &Matrix4, psi0: &Vector4, grid: &TimeGrid, substeps: usize) -> Result<StateSeries> {
    if grid.is_empty() {
        return Err(Error::GridEmpty);
    }
    let substeps = substeps.max(1);
    let tau = grid.points();
    let mut states = Vec::with_capacity(tau.len());
    let mut y = *psi0;
    let mut t = 0.0;
    // integrate from tau = 0 up to the first sample as well
    for &target in tau {
        let span = target - t;
        if span > 0.0 {
            let h = span / substeps as f64;
            for _ in 0..substeps {
                let k1 = *l * y;
                let k2 = *l * (y + k1.scale(0.5 * h));
                let k3 = *l * (y + k2.scale(0.5 * h));
                let k4 = *l * (y + k3.scale(h));
                y += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
            }
        }
        t = target;
        states.push(y);
    }
    Ok(StateSeries { tau: tau.to_vec(), states })
}
