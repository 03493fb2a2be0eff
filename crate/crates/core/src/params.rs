//! Circuit parameters, their dimensionless combinations, and the regime test
//! that decides whether the Liouvillian has four distinct real eigenvalues.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the two coupled LC sub-circuits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// L, henry
    pub inductance: f64,
    /// C, farad
    pub capacitance: f64,
    /// R, ohm; enters the two branches with opposite sign
    pub resistance: f64,
    /// M, henry
    pub mutual_inductance: f64,
    /// I_1(0), ampere
    pub initial_current: f64,
}

/// Dimensionless parameters plus the two frequency scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub mu: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub omega0: f64,
    pub omega_p: f64,
}

/// Outcome of the regime test. Never an error: every condition is reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub rho: f64,
    pub condition_rho_positive: bool,
    pub condition_gamma_sq_gt_2alpha: bool,
    pub condition_mu_sq_lt_1: bool,
    pub coupling_nonzero: bool,
    pub accepted: bool,
    /// `|rho| < 1e-9`: eigenvalues are about to collide.
    pub near_degenerate: bool,
    /// `rho < (gamma^2 - 2 alpha)^2`, which holds identically when `mu^2 < 1`.
    pub discriminant_below_square: bool,
}

pub const NEAR_DEGENERATE_RHO: f64 = 1e-9;

impl CircuitParams {
    /// Normalised circuit: `L = C = 1`, `R = 1/gamma`, `M = mu`.
    pub fn normalized(mu: f64, gamma: f64, initial_current: f64) -> Self {
        Self {
            inductance: 1.0,
            capacitance: 1.0,
            resistance: 1.0 / gamma,
            mutual_inductance: mu,
            initial_current,
        }
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        derive(self)
    }

    /// True when `L = C = 1`, so that `tau`-derivatives are time derivatives.
    pub fn is_normalized(&self) -> bool {
        self.inductance == 1.0 && self.capacitance == 1.0
    }
}

pub fn derive(p: &CircuitParams) -> Result<DerivedParams> {
    for (name, value) in [
        ("inductance", p.inductance),
        ("capacitance", p.capacitance),
        ("resistance", p.resistance),
    ] {
        if !(value > 0.0) {
            return Err(Error::NonPositiveParameter { name, value });
        }
    }
    if !(p.mutual_inductance.abs() < p.inductance) {
        return Err(Error::CouplingOutOfRange {
            mutual: p.mutual_inductance,
            inductance: p.inductance,
        });
    }
    let mu = p.mutual_inductance / p.inductance;
    Ok(DerivedParams {
        mu,
        gamma: (p.inductance / p.capacitance).sqrt() / p.resistance,
        alpha: 1.0 / (1.0 - mu * mu),
        omega0: 1.0 / (p.inductance * p.capacitance).sqrt(),
        omega_p: 1.0 / (p.resistance * p.capacitance),
    })
}

impl DerivedParams {
    /// Dimensionless parameters in normalised units (`omega0 = 1`).
    ///
    /// No range checking: `mu = ±1` yields an infinite `alpha`, which
    /// [`validate`] then reports as rejected.
    pub fn from_dimensionless(mu: f64, gamma: f64) -> Self {
        Self {
            mu,
            gamma,
            alpha: 1.0 / (1.0 - mu * mu),
            omega0: 1.0,
            omega_p: gamma,
        }
    }

    /// `rho = gamma^4 + 4 alpha^2 mu^2 - 4 alpha gamma^2`
    pub fn rho(&self) -> f64 {
        let g2 = self.gamma * self.gamma;
        g2 * g2 + 4.0 * self.alpha * self.alpha * self.mu * self.mu - 4.0 * self.alpha * g2
    }

    pub fn validate(&self) -> RegimeReport {
        validate(self)
    }
}

pub fn validate(d: &DerivedParams) -> RegimeReport {
    let rho = d.rho();
    let spread = d.gamma * d.gamma - 2.0 * d.alpha;
    let condition_rho_positive = rho > 0.0;
    let condition_gamma_sq_gt_2alpha = spread > 0.0;
    let condition_mu_sq_lt_1 = d.mu * d.mu < 1.0;
    let coupling_nonzero = d.mu != 0.0;
    RegimeReport {
        rho,
        condition_rho_positive,
        condition_gamma_sq_gt_2alpha,
        condition_mu_sq_lt_1,
        coupling_nonzero,
        accepted: condition_rho_positive
            && condition_gamma_sq_gt_2alpha
            && condition_mu_sq_lt_1
            && coupling_nonzero,
        near_degenerate: rho.abs() < NEAR_DEGENERATE_RHO,
        discriminant_below_square: rho < spread * spread,
    }
}

impl RegimeReport {
    /// The three inequalities that make the spectrum real and simple; the
    /// coupling may vanish here.
    pub fn spectral_ok(&self) -> bool {
        self.condition_rho_positive && self.condition_gamma_sq_gt_2alpha && self.condition_mu_sq_lt_1
    }

    pub fn failure_reason(&self) -> Option<String> {
        let mut why = Vec::new();
        if !self.condition_rho_positive {
            why.push(format!("rho = {} <= 0", self.rho));
        }
        if !self.condition_gamma_sq_gt_2alpha {
            why.push("gamma^2 - 2 alpha <= 0".to_string());
        }
        if !self.condition_mu_sq_lt_1 {
            why.push("mu^2 >= 1".to_string());
        }
        if !self.coupling_nonzero {
            why.push("mu = 0".to_string());
        }
        (!why.is_empty()).then(|| why.join(", "))
    }
}
