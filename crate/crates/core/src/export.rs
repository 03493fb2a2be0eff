//! Fixed-format CSV and JSON output.
//!
//! Numbers are written with 17 significant digits and negative zero is
//! printed as zero, so identical inputs give byte-identical files.

use std::fmt::Write;

use serde::Serialize;

use crate::dynamics::{AdjointCircuit, StateSeries, Trajectory};
use crate::heisenberg::GrowthReport;
use crate::observables::{EnergySeries, PowerSeries};

pub const TRAJECTORY_HEADER: &str = "tau,V1,V2,V1p,V2p,I1,I2";
pub const OBSERVABLE_HEADER: &str = "P1,P2,E1,E2";
pub const NORM_HEADER: &str = "tau,normN1,normN2,ratio1,ratio2";

pub fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Writes `header` and then one row per index, taking column `j` from `columns[j]`.
/// All columns must have the same length.
pub fn columns_csv(header: &str, columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = String::with_capacity(rows * columns.len() * 24 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for i in 0..rows {
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_num(col[i]));
        }
        out.push('\n');
    }
    out
}

/// `tau,V1,V2,V1p,V2p,I1,I2`, extended by `P1,P2,E1,E2` when both series are given.
pub fn trajectory_csv(traj: &Trajectory, observables: Option<(&PowerSeries, &EnergySeries)>) -> String {
    let mut cols: Vec<&[f64]> = vec![&traj.tau, &traj.v1, &traj.v2, &traj.v1_prime, &traj.v2_prime, &traj.i1, &traj.i2];
    let mut header = TRAJECTORY_HEADER.to_string();
    if let Some((p, e)) = observables {
        cols.extend([p.p1.as_slice(), &p.p2, &e.e1, &e.e2]);
        let _ = write!(header, ",{OBSERVABLE_HEADER}");
    }
    columns_csv(&header, &cols)
}

/// One row of the JSON mirror of the trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct TrajectoryRow {
    pub tau: f64,
    pub V1: f64,
    pub V2: f64,
    pub V1p: f64,
    pub V2p: f64,
    pub I1: f64,
    pub I2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub P1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub P2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub E1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub E2: Option<f64>,
}

pub fn trajectory_rows(traj: &Trajectory, observables: Option<(&PowerSeries, &EnergySeries)>) -> Vec<TrajectoryRow> {
    (0..traj.len())
        .map(|i| TrajectoryRow {
            tau: traj.tau[i],
            V1: traj.v1[i],
            V2: traj.v2[i],
            V1p: traj.v1_prime[i],
            V2p: traj.v2_prime[i],
            I1: traj.i1[i],
            I2: traj.i2[i],
            P1: observables.map(|(p, _)| p.p1[i]),
            P2: observables.map(|(p, _)| p.p2[i]),
            E1: observables.map(|(_, e)| e.e1[i]),
            E2: observables.map(|(_, e)| e.e2[i]),
        })
        .collect()
}

/// `tau,x1,x2,x3,x4` (or any four component names).
pub fn state_csv(series: &StateSeries, names: [&str; 4]) -> String {
    let comps: Vec<Vec<f64>> = (0..4).map(|k| series.states.iter().map(|s| s[k]).collect()).collect();
    let header = format!("tau,{}", names.join(","));
    columns_csv(&header, &[&series.tau, &comps[0], &comps[1], &comps[2], &comps[3]])
}

pub fn adjoint_csv(c: &AdjointCircuit) -> String {
    columns_csv("tau,I1,I2,V1,V2,residual", &[&c.tau, &c.i1, &c.i2, &c.v1, &c.v2, &c.residual])
}

pub fn norm_csv(g: &GrowthReport) -> String {
    columns_csv(NORM_HEADER, &[&g.tau, &g.norm_n[0], &g.norm_n[1], &g.ratio[0], &g.ratio[1]])
}

/// Two-column `tau,<name>` series for external plotting.
pub fn plot_series(name: &str, tau: &[f64], values: &[f64]) -> String {
    columns_csv(&format!("tau,{name}"), &[tau, values])
}
