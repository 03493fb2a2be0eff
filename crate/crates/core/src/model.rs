//! A fully assembled circuit: parameters, spectrum, pseudo-fermions and bases.

use serde::{Deserialize, Serialize};

use crate::basis::{build_bases, BasisPair};
use crate::dynamics::{initial_state, CurrentLaw, DerivativeConvention, ModalSolution, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{Matrix4, Vector4};
use crate::liouvillian::{build_liouvillian, spectrum, Spectrum};
use crate::params::{CircuitParams, DerivedParams, RegimeReport};
use crate::pfalgebra::{build_intertwiner, build_pf, Gauge, Intertwiner, PfSystem};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelOptions {
    pub gauge: Gauge,
    pub convention: DerivativeConvention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: CircuitParams,
    pub derived: DerivedParams,
    pub regime: RegimeReport,
    pub spectrum: Spectrum,
    pub liouvillian: Matrix4,
    pub intertwiner: Intertwiner,
    pub pf: PfSystem,
    pub pair: BasisPair,
    pub options: ModelOptions,
}

impl Model {
    /// Fails with [`Error::RegimeRejected`] unless the regime is accepted.
    pub fn new(params: CircuitParams, options: ModelOptions) -> Result<Self> {
        let derived = params.derive()?;
        let regime = derived.validate();
        if let Some(why) = regime.failure_reason() {
            return Err(Error::RegimeRejected(why));
        }
        let spectrum = spectrum(&derived)?;
        let liouvillian = build_liouvillian(&derived)?;
        let intertwiner = build_intertwiner(&spectrum, &derived, options.gauge)?;
        let pf = build_pf(&intertwiner, &spectrum, &liouvillian)?;
        let pair = build_bases(&intertwiner.t, &spectrum)?;
        Ok(Self { params, derived, regime, spectrum, liouvillian, intertwiner, pf, pair, options })
    }

    /// Same circuit under another gauge.
    pub fn with_gauge(&self, gauge: Gauge) -> Result<Self> {
        Self::new(self.params, ModelOptions { gauge, ..self.options })
    }

    pub fn law(&self) -> CurrentLaw {
        CurrentLaw::new(&self.params, self.options.convention)
    }

    pub fn initial_state(&self) -> Vector4 {
        initial_state(self.params.initial_current, &self.params, self.options.convention)
    }

    pub fn solution(&self) -> ModalSolution {
        ModalSolution::new(&self.initial_state(), &self.pair, &self.spectrum)
    }

    pub fn simulate(&self, grid: &TimeGrid) -> Result<Trajectory> {
        Ok(Trajectory::from_series(&self.solution().sample(grid)?, self.law()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_model() {
        let m = Model::new(CircuitParams::normalized(0.5, 3.0, 1.0), ModelOptions::default()).unwrap();
        assert!(m.regime.accepted);
        let traj = m.simulate(&TimeGrid::uniform(5.0, 11).unwrap()).unwrap();
        assert_eq!(
            [traj.tau[0], traj.v1[0], traj.v2[0], traj.v1_prime[0], traj.v2_prime[0], traj.i1[0]],
            [0.0, 0.0, 0.0, -1.0, 0.0, 1.0]
        );
        assert_eq!(traj.i2[0], 0.0);
    }

    #[test]
    fn rejected_regimes() {
        let opts = ModelOptions::default();
        for (mu, gamma) in [(0.5, 1.0), (0.0, 3.0), (0.9, 1.0)] {
            let err = Model::new(CircuitParams::normalized(mu, gamma, 1.0), opts).unwrap_err();
            assert!(matches!(err, Error::RegimeRejected(_)), "{mu} {gamma}: {err}");
        }
    }
}
