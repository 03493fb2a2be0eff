use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use pfcircuit_core::dynamics::{adjoint_circuit_map, evolve_adjoint, evolve_h0, metric_route_residual};
use pfcircuit_core::export::{
    adjoint_csv, fmt_num, norm_csv, plot_series, state_csv, trajectory_csv, trajectory_rows,
};
use pfcircuit_core::heisenberg::{growth_bound_report, number_evolution};
use pfcircuit_core::liouvillian::spectrum;
use pfcircuit_core::observables::{classify_asymptotics, energy, power, Bound, GainLossReport};
use pfcircuit_core::{run_suite, CircuitParams, Model, SuiteOptions, Vector4};

use crate::config::{Format, Mode, RunConfig};
use crate::output::{json, Sink};
use crate::{Command, ConfigError, EXIT_CHECK_FAILED, EXIT_OK, EXIT_REGIME};

const ADJOINT_TOL: f64 = 1e-8;
const TWO_PATH_TOL: f64 = 1e-8;

pub fn run(command: Command, cfg: &RunConfig) -> Result<u8> {
    let sink = Sink::new(cfg.output_dir.clone())?;
    match command {
        Command::Validate => validate(cfg, &sink),
        Command::Spectrum => spectrum_cmd(cfg, &sink),
        Command::Simulate => simulate(cfg, &sink),
        Command::Verify => verify(cfg, &sink),
        Command::Adjoint => adjoint(cfg, &sink),
        Command::H0 => h0(cfg, &sink),
        Command::Heisenberg => heisenberg(cfg, &sink),
        Command::Sweep => sweep(cfg, &sink),
    }
}

fn model(cfg: &RunConfig) -> Result<Model> {
    Ok(Model::new(cfg.params(), cfg.model_options())?)
}

fn validate(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    let report = cfg.params().derive()?.validate();
    sink.primary("regime.json", &json(&report)?)?;
    Ok(if report.accepted { EXIT_OK } else { EXIT_REGIME })
}

fn spectrum_cmd(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    let s = spectrum(&cfg.params().derive()?)?;
    sink.primary("spectrum.json", &json(&s)?)?;
    Ok(EXIT_OK)
}

fn simulate(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    let m = model(cfg)?;
    let traj = m.simulate(&cfg.grid()?)?;
    let p = power(&traj);
    let e = energy(&traj, &m.params, m.options.convention);
    match cfg.format {
        Format::Csv => sink.primary("trajectory.csv", &trajectory_csv(&traj, Some((&p, &e))))?,
        Format::Json => sink.primary("trajectory.json", &json(&trajectory_rows(&traj, Some((&p, &e))))?)?,
    }
    for (name, values) in [
        ("V1", &traj.v1),
        ("V2", &traj.v2),
        ("I1", &traj.i1),
        ("I2", &traj.i2),
        ("P1", &p.p1),
        ("P2", &p.p2),
        ("E1", &e.e1),
        ("E2", &e.e2),
    ] {
        sink.extra(&format!("plot/{name}.csv"), &plot_series(name, &traj.tau, values))?;
    }
    let coeffs = m.solution().coefficients;
    let gl = classify_asymptotics(&m.spectrum, &m.derived, &m.params, Some((&p, &coeffs)))?;
    sink.extra("gain_loss.json", &json(&gl)?)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    pass: bool,
    failed: Vec<&'a str>,
    checks: &'a pfcircuit_core::VerificationReport,
    reported: &'a pfcircuit_core::suite::Reported,
}

fn verify(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    let m = model(cfg)?;
    let opts = SuiteOptions {
        tau_max: cfg.tau_max,
        samples: cfg.samples,
        rk4_step: cfg.rk4_step,
        seed: cfg.seed,
        ..SuiteOptions::default()
    };
    let out = run_suite(&m, &opts)?;
    let failed: Vec<&str> = out.checks.failures().map(|(k, _)| k).collect();
    for name in &failed {
        let c = &out.checks.checks[*name];
        eprintln!("FAIL {name}: residual {:e} >= tolerance {:e}", c.residual, c.tolerance);
    }
    let doc = VerifyOutput { pass: failed.is_empty(), failed: failed.clone(), checks: &out.checks, reported: &out.reported };
    sink.primary("verify.json", &json(&doc)?)?;
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct AdjointSummary {
    max_identification_residual: f64,
    metric_route_residual: f64,
    pass: bool,
}

fn adjoint(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    let m = model(cfg)?;
    let grid = cfg.grid()?;
    let x0 = Vector4::from([m.params.initial_current, 0.0, 0.0, 0.0]);
    let x = evolve_adjoint(&m.pair, &x0, &grid)?;
    let mapped = adjoint_circuit_map(&x, &m.liouvillian, &m.params, cfg.adjoint_units)?;
    let psi = m.solution().sample(&grid)?;
    let eta = evolve_adjoint(&m.pair, &(m.pf.s_psi * m.initial_state()), &grid)?;
    let summary = AdjointSummary {
        max_identification_residual: mapped.max_residual(),
        metric_route_residual: metric_route_residual(&psi, &eta, &m.pf.s_psi),
        pass: false,
    };
    let summary = AdjointSummary {
        pass: summary.max_identification_residual < ADJOINT_TOL && summary.metric_route_residual < ADJOINT_TOL,
        ..summary
    };
    match cfg.format {
        Format::Csv => sink.primary("adjoint.csv", &adjoint_csv(&mapped))?,
        Format::Json => sink.primary("adjoint.json", &json(&mapped)?)?,
    }
    sink.extra("adjoint_summary.json", &json(&summary)?)?;
    Ok(if summary.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn h0(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    let s = spectrum(&cfg.params().derive()?)?;
    let ys = evolve_h0(&s, &Vector4::from([1.0; 4]), &cfg.grid()?)?;
    match cfg.format {
        Format::Csv => sink.primary("h0.csv", &state_csv(&ys, ["y1", "y2", "y3", "y4"]))?,
        Format::Json => sink.primary("h0.json", &json(&ys)?)?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GrowthSummary {
    constant: [f64; 2],
    initial_norm: [f64; 2],
    unit_norm_premise: [bool; 2],
    bounded: bool,
    two_path_deviation: [f64; 2],
    printed_order_deviation: [f64; 2],
}

fn heisenberg(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    let m = model(cfg)?;
    let grid = cfg.grid()?;
    let n1 = number_evolution(1, &m.pf, &grid)?;
    let n2 = number_evolution(2, &m.pf, &grid)?;
    let g = growth_bound_report(&n1.generic, &n2.generic, &m.spectrum);
    let summary = GrowthSummary {
        constant: g.constant,
        initial_norm: g.initial_norm,
        unit_norm_premise: g.unit_norm_premise,
        bounded: g.bounded,
        two_path_deviation: [n1.max_closed_deviation(), n2.max_closed_deviation()],
        printed_order_deviation: [n1.max_printed_deviation(), n2.max_printed_deviation()],
    };
    match cfg.format {
        Format::Csv => sink.primary("norms.csv", &norm_csv(&g))?,
        Format::Json => sink.primary("norms.json", &json(&g)?)?,
    }
    sink.extra("growth.json", &json(&summary)?)?;
    let ok = g.bounded && summary.two_path_deviation.iter().all(|d| *d < TWO_PATH_TOL);
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    mu: f64,
    gamma: f64,
    rho: Option<f64>,
    condition_rho_positive: Option<bool>,
    condition_gamma_sq_gt_2alpha: Option<bool>,
    condition_mu_sq_lt_1: Option<bool>,
    coupling_nonzero: Option<bool>,
    accepted: bool,
    near_degenerate: Option<bool>,
    gain_loss: Option<GainLossReport>,
    error: Option<String>,
}

const SWEEP_HEADER: &str = "mu,gamma,rho,condition_rho_positive,condition_gamma_sq_gt_2alpha,condition_mu_sq_lt_1,\
coupling_nonzero,accepted,near_degenerate,l4,power_window_ok,energy_lower,energy_upper,energy_window_ok,\
p1_diverges_to,p2_diverges_to,e1_diverges_to,e2_diverges_to,measured_p1_sign,measured_p2_sign,error";

fn sweep_point(cfg: &RunConfig, mu: f64, gamma: f64) -> SweepRow {
    let mut row = SweepRow {
        mu,
        gamma,
        rho: None,
        condition_rho_positive: None,
        condition_gamma_sq_gt_2alpha: None,
        condition_mu_sq_lt_1: None,
        coupling_nonzero: None,
        accepted: false,
        near_degenerate: None,
        gain_loss: None,
        error: None,
    };
    let params = CircuitParams::normalized(mu, gamma, cfg.i1);
    let d = match params.derive() {
        Ok(d) => d,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let r = d.validate();
    row.rho = Some(r.rho);
    row.condition_rho_positive = Some(r.condition_rho_positive);
    row.condition_gamma_sq_gt_2alpha = Some(r.condition_gamma_sq_gt_2alpha);
    row.condition_mu_sq_lt_1 = Some(r.condition_mu_sq_lt_1);
    row.coupling_nonzero = Some(r.coupling_nonzero);
    row.accepted = r.accepted;
    row.near_degenerate = Some(r.near_degenerate);
    if !r.accepted {
        return row;
    }
    let result = (|| -> pfcircuit_core::Result<GainLossReport> {
        let m = Model::new(params, cfg.model_options())?;
        let traj = m.simulate(&pfcircuit_core::dynamics::TimeGrid::uniform(cfg.tau_max, cfg.samples)?)?;
        let p = power(&traj);
        classify_asymptotics(&m.spectrum, &m.derived, &m.params, Some((&p, &m.solution().coefficients)))
    })();
    match result {
        Ok(gl) => row.gain_loss = Some(gl),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let gl = r.gain_loss.as_ref();
        let fields = [
            fmt_num(r.mu),
            fmt_num(r.gamma),
            opt_num(r.rho),
            opt_bool(r.condition_rho_positive),
            opt_bool(r.condition_gamma_sq_gt_2alpha),
            opt_bool(r.condition_mu_sq_lt_1),
            opt_bool(r.coupling_nonzero),
            r.accepted.to_string(),
            opt_bool(r.near_degenerate),
            opt_num(gl.map(|g| g.l4)),
            opt_bool(gl.map(|g| g.power_window_ok)),
            gl.map(|g| match g.energy_lower {
                Bound::Real(x) => fmt_num(x),
                Bound::Imaginary => "imaginary".to_string(),
            })
            .unwrap_or_default(),
            opt_num(gl.map(|g| g.energy_upper)),
            opt_bool(gl.map(|g| g.energy_window_ok)),
            gl.map(|g| g.p1_diverges_to.as_str().to_string()).unwrap_or_default(),
            gl.map(|g| g.p2_diverges_to.as_str().to_string()).unwrap_or_default(),
            gl.map(|g| g.e1_diverges_to.as_str().to_string()).unwrap_or_default(),
            gl.map(|g| g.e2_diverges_to.as_str().to_string()).unwrap_or_default(),
            gl.and_then(|g| g.measured).map(|m| m.p1_sign.as_str().to_string()).unwrap_or_default(),
            gl.and_then(|g| g.measured).map(|m| m.p2_sign.as_str().to_string()).unwrap_or_default(),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn sweep(cfg: &RunConfig, sink: &Sink) -> Result<u8> {
    if cfg.mode != Mode::Normalized {
        return Err(ConfigError("sweep runs over (mu, gamma) in normalized mode".into()).into());
    }
    let points: Vec<(f64, f64)> = cfg
        .mu_range
        .values()
        .into_iter()
        .flat_map(|mu| cfg.gamma_range.values().into_iter().map(move |g| (mu, g)))
        .collect();
    // `collect` on an indexed parallel iterator keeps grid order
    let rows: Vec<SweepRow> = points.par_iter().map(|&(mu, g)| sweep_point(cfg, mu, g)).collect();
    match cfg.format {
        Format::Csv => sink.primary("sweep.csv", &sweep_csv(&rows))?,
        Format::Json => sink.primary("sweep.json", &json(&rows)?)?,
    }
    Ok(EXIT_OK)
}
