//! Power and energy of the two sub-circuits, and their large-`tau` behaviour.

use serde::{Serialize, Serializer};

use crate::dynamics::{Coefficients, DerivativeConvention, Trajectory};
use crate::error::{Error, Result};
use crate::liouvillian::Spectrum;
use crate::params::{CircuitParams, DerivedParams};

/// Below this `|c11|` the dominant mode counts as unpopulated.
pub const DOMINANT_MODE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSeries {
    /// `V_j I_j`
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// `(+-1/R) V_j^2 - c V_j' V_j`
    pub p1_rewritten: Vec<f64>,
    pub p2_rewritten: Vec<f64>,
}

impl PowerSeries {
    /// Largest `|product - rewritten| / max(|V^2/R|, |c V' V|, tiny)` over both series.
    pub fn max_route_deviation(&self, traj: &Trajectory) -> f64 {
        let law = &traj.law;
        let mut worst = 0.0f64;
        for i in 0..self.p1.len() {
            let s1 = (law.conductance * traj.v1[i] * traj.v1[i]).abs().max((law.capacitive * traj.v1_prime[i] * traj.v1[i]).abs());
            let s2 = (law.conductance * traj.v2[i] * traj.v2[i]).abs().max((law.capacitive * traj.v2_prime[i] * traj.v2[i]).abs());
            worst = worst
                .max((self.p1[i] - self.p1_rewritten[i]).abs() / s1.max(f64::MIN_POSITIVE))
                .max((self.p2[i] - self.p2_rewritten[i]).abs() / s2.max(f64::MIN_POSITIVE));
        }
        worst
    }
}

pub fn power(traj: &Trajectory) -> PowerSeries {
    let law = &traj.law;
    let n = traj.len();
    let mut out = PowerSeries {
        p1: Vec::with_capacity(n),
        p2: Vec::with_capacity(n),
        p1_rewritten: Vec::with_capacity(n),
        p2_rewritten: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (v1, v2) = (traj.v1[i], traj.v2[i]);
        out.p1.push(v1 * traj.i1[i]);
        out.p2.push(v2 * traj.i2[i]);
        out.p1_rewritten.push(law.conductance * v1 * v1 - law.capacitive * traj.v1_prime[i] * v1);
        out.p2_rewritten.push(-law.conductance * v2 * v2 - law.capacitive * traj.v2_prime[i] * v2);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySeries {
    /// `C V_n^2 / 2 + L I_n^2 / 2`
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    /// `L C^2 (V_n^2 (omega0^2 +- omega_p^2) - V_n'^2) / 2`, as printed
    pub e1_rewritten: Vec<f64>,
    pub e2_rewritten: Vec<f64>,
}

impl EnergySeries {
    /// Largest `|definition - rewritten| / max(1, |definition|)`.
    pub fn max_rewrite_deviation(&self) -> f64 {
        self.e1
            .iter()
            .zip(&self.e1_rewritten)
            .chain(self.e2.iter().zip(&self.e2_rewritten))
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Energies from the definition, plus the printed rewriting for comparison.
///
/// `V'` in the rewriting is converted to a `t`-derivative with `omega0`
/// under [`DerivativeConvention::OmegaScaled`].
pub fn energy(traj: &Trajectory, params: &CircuitParams, convention: DerivativeConvention) -> EnergySeries {
    let (l, c) = (params.inductance, params.capacitance);
    let omega0 = 1.0 / (l * c).sqrt();
    let omega_p = 1.0 / (params.resistance * c);
    let rate = match convention {
        DerivativeConvention::OmegaScaled => omega0,
        DerivativeConvention::Verbatim => 1.0,
    };
    let n = traj.len();
    let mut out = EnergySeries {
        e1: Vec::with_capacity(n),
        e2: Vec::with_capacity(n),
        e1_rewritten: Vec::with_capacity(n),
        e2_rewritten: Vec::with_capacity(n),
    };
    let pre = 0.5 * l * c * c;
    for i in 0..n {
        let (v1, v2) = (traj.v1[i], traj.v2[i]);
        out.e1.push(0.5 * c * v1 * v1 + 0.5 * l * traj.i1[i] * traj.i1[i]);
        out.e2.push(0.5 * c * v2 * v2 + 0.5 * l * traj.i2[i] * traj.i2[i]);
        let (d1, d2) = (rate * traj.v1_prime[i], rate * traj.v2_prime[i]);
        out.e1_rewritten.push(pre * (v1 * v1 * (omega0 * omega0 + omega_p * omega_p) - d1 * d1));
        out.e2_rewritten.push(pre * (v2 * v2 * (omega0 * omega0 - omega_p * omega_p) - d2 * d2));
    }
    out
}

/// Direction of divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
            Sign::Zero => "0",
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A window bound that may be undefined when its radicand is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Real(f64),
    Imaginary,
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Real(x) => s.serialize_f64(*x),
            Bound::Imaginary => s.serialize_str("imaginary"),
        }
    }
}

/// Measured signs of `P_j` over the tail of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredTail {
    pub p1_mean: f64,
    pub p2_mean: f64,
    pub p1_sign: Sign,
    pub p2_sign: Sign,
    /// Both measured signs equal the predicted ones.
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainLossReport {
    pub l4: f64,
    /// `1/R - C omega0 l4`
    pub gain_margin: f64,
    /// `-1/R - C omega0 l4`
    pub loss_margin: f64,
    /// `-gamma < l4 < gamma`
    pub power_window_ok: bool,
    /// `sqrt(1 - gamma^2)` in units of `omega0`
    pub energy_lower: Bound,
    /// `sqrt(1 + gamma^2)` in units of `omega0`
    pub energy_upper: f64,
    pub energy_window_ok: bool,
    pub p1_diverges_to: Sign,
    pub p2_diverges_to: Sign,
    /// Signs predicted by the rewritten energy expressions.
    pub e1_diverges_to: Sign,
    pub e2_diverges_to: Sign,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<MeasuredTail>,
}

/// Evaluates the gain/loss windows. When a trajectory and its coefficients
/// are given and `|c11| > 1e-12`, the mean of `P_j` over the last 10% of the
/// samples is compared with the predicted sign.
pub fn classify_asymptotics(
    spectrum: &Spectrum,
    derived: &DerivedParams,
    params: &CircuitParams,
    measured: Option<(&PowerSeries, &Coefficients)>,
) -> Result<GainLossReport> {
    if derived.mu == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let l4 = spectrum.l4;
    let (w0, wp) = (derived.omega0, derived.omega_p);
    let g = 1.0 / params.resistance;
    let cw = params.capacitance * w0;
    let gain_margin = g - cw * l4;
    let loss_margin = -g - cw * l4;
    let rescaled = w0 * l4;
    let lower_sq = w0 * w0 - wp * wp;
    let upper_sq = w0 * w0 + wp * wp;
    let mut report = GainLossReport {
        l4,
        gain_margin,
        loss_margin,
        power_window_ok: gain_margin > 0.0 && loss_margin < 0.0,
        energy_lower: if lower_sq >= 0.0 { Bound::Real(lower_sq.sqrt() / w0) } else { Bound::Imaginary },
        energy_upper: upper_sq.sqrt() / w0,
        energy_window_ok: lower_sq - rescaled * rescaled < 0.0 && upper_sq - rescaled * rescaled > 0.0,
        p1_diverges_to: Sign::of(gain_margin),
        p2_diverges_to: Sign::of(loss_margin),
        e1_diverges_to: Sign::of(upper_sq - rescaled * rescaled),
        e2_diverges_to: Sign::of(lower_sq - rescaled * rescaled),
        measured: None,
    };
    if let Some((p, c)) = measured {
        if c.c11().abs() > DOMINANT_MODE_FLOOR && !p.p1.is_empty() {
            let n = p.p1.len();
            let start = n - (n / 10).max(1);
            let mean = |v: &[f64]| v[start..].iter().sum::<f64>() / (n - start) as f64;
            let (m1, m2) = (mean(&p.p1), mean(&p.p2));
            report.measured = Some(MeasuredTail {
                p1_mean: m1,
                p2_mean: m2,
                p1_sign: Sign::of(m1),
                p2_sign: Sign::of(m2),
                consistent: Sign::of(m1) == report.p1_diverges_to && Sign::of(m2) == report.p2_diverges_to,
            });
        }
    }
    Ok(report)
}

/// Least-squares slope of `log |y|` against `tau` over `tau in [from, to]`.
/// Returns `None` when fewer than two usable samples fall in the window.
pub fn log_slope(tau: &[f64], y: &[f64], from: f64, to: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = tau
        .iter()
        .zip(y)
        .filter(|(t, v)| **t >= from && **t <= to && v.abs() > 0.0)
        .map(|(t, v)| (*t, v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(sxy / sxx)
}
