//! Scenario execution.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rabsim::analysis::{fidelity_time_series, fidelity_vs_gamma, gamma_ladder, sweep_heatmap};
use rabsim::dynamics::{convergence_check, propagate_density};
use rabsim::hilbert::basis::{S11, SRR};
use rabsim::models::{antiblockade_time, gate_time};
use rabsim::units::{angular_to_khz, khz_to_angular, seconds_to_us};
use rabsim::{DensityMatrix, DriveParams, TimeGrid, Trajectory};
use serde_json::{json, Map, Value};

use crate::config::{Scenario, ScenarioConfig};
use crate::output::CsvTable;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub rows: usize,
    pub sidecar_json: Value,
}

/// Runs the scenario, writing the CSV at `cfg.out` and a JSON sidecar next to it.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let params = cfg.params()?;
    let (table, mut info) = match cfg.scenario {
        Scenario::RabPopulations => rab_populations(cfg, &params)?,
        Scenario::Heatmap => heatmap(cfg, &params)?,
        Scenario::GateFidelity => gate_fidelity(cfg, &params)?,
        Scenario::FidelityVsGamma => fidelity_gamma(cfg, &params)?,
    };
    info.insert("config".into(), config_json(cfg));
    info.insert("params".into(), params_json(cfg, &params));
    info.insert("rows".into(), json!(table));
    info.insert("csv".into(), json!(cfg.out.display().to_string()));
    info.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
    let sidecar_json = Value::Object(info);
    let sidecar = cfg.sidecar_path();
    let text = serde_json::to_string_pretty(&sidecar_json).expect("JSON values serialize");
    fs::write(&sidecar, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", sidecar.display())))?;
    Ok(RunSummary { csv: cfg.out.clone(), sidecar, rows: table, sidecar_json })
}

fn config_json(cfg: &ScenarioConfig) -> Value {
    json!({
        "scenario": cfg.scenario.name(),
        "gate": cfg.gate.to_string(),
        "omega_m_mhz": cfg.omega_m_mhz,
        "omega_ratio": cfg.omega_ratio,
        "gamma_khz": cfg.gamma_khz,
        "v_over_om": cfg.v_over_om,
        "grid_n": cfg.grid_n,
        "dt_divisor": cfg.dt_divisor,
        "v_range": [cfg.heatmap.v_range.0, cfg.heatmap.v_range.1],
        "v_points": cfg.heatmap.v_points,
        "w_range": [cfg.heatmap.w_range.0, cfg.heatmap.w_range.1],
        "w_points": cfg.heatmap.w_points,
        "gamma_max_khz": cfg.gamma_max_khz,
        "gamma_points": cfg.gamma_points,
        "out": cfg.out.display().to_string(),
    })
}

fn params_json(cfg: &ScenarioConfig, p: &DriveParams) -> Value {
    json!({
        "omega_m_rad_s": p.omega_m,
        "omega_rad_s": p.omega,
        "v_rad_s": p.v,
        "gamma_rad_s": p.gamma,
        "v_over_om": cfg.resolved_v_over_om(),
        "v_source": if cfg.v_over_om.is_some() { "override" } else { "resonance condition" },
        "gate": p.gate.to_string(),
    })
}

fn grid_json(grid: &TimeGrid) -> Value {
    json!({ "dt_s": grid.dt(), "steps": grid.steps(), "t_end_s": grid.t_end(), "sample_stride": grid.sample_stride() })
}

fn final_p_rr(traj: &Trajectory<DensityMatrix>) -> f64 {
    traj.last().populations()[SRR.index()]
}

fn rab_populations(cfg: &ScenarioConfig, p: &DriveParams) -> Result<(usize, Map<String, Value>), CliError> {
    let mut csv = CsvTable::create(&cfg.out, &["t_us", "p_11", "p_rr"])?;
    let t_end = 2.0 * antiblockade_time(p.omega_m, p.omega);
    let grid = TimeGrid::with_divisor(p, 0.0, t_end, cfg.dt_divisor)?;
    let rho0 = DensityMatrix::basis_state(S11);
    let traj = propagate_density(p, &rho0, &grid)?;
    let mut max_rr: f64 = 0.0;
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let pops = rho.populations();
        max_rr = max_rr.max(pops[SRR.index()]);
        csv.row(&[Some(seconds_to_us(*t)), Some(pops[S11.index()]), Some(pops[SRR.index()])])?;
    }
    csv.finish()?;
    let conv = convergence_check(p, &rho0, &grid, final_p_rr)?;
    let mut info = Map::new();
    info.insert("grid".into(), grid_json(&grid));
    info.insert("antiblockade_time_s".into(), json!(antiblockade_time(p.omega_m, p.omega)));
    info.insert("max_p_rr".into(), json!(max_rr));
    info.insert(
        "convergence".into(),
        json!({ "observable": "final p_rr", "coarse": conv.coarse, "fine": conv.fine, "delta": conv.delta, "passed": conv.passed }),
    );
    Ok((traj.len(), info))
}

fn heatmap(cfg: &ScenarioConfig, p: &DriveParams) -> Result<(usize, Map<String, Value>), CliError> {
    let mut csv = CsvTable::create(&cfg.out, &["v_over_om", "w_over_om", "p_rr"])?;
    let grid = sweep_heatmap(p, &cfg.heatmap, cfg.dt_divisor)?;
    let mut rows = 0;
    for (v, w, pr) in grid.cells() {
        csv.row(&[Some(v), Some(w), pr])?;
        rows += 1;
    }
    csv.finish()?;
    let ridge: Vec<Value> = grid
        .w_axis
        .iter()
        .zip(grid.ridge_argmax())
        .map(|(w, k)| json!({ "w_over_om": w, "argmax_v_over_om": k.map(|k| grid.v_axis[k]) }))
        .collect();
    let mut info = Map::new();
    info.insert("dt_divisor".into(), json!(cfg.dt_divisor));
    info.insert("failed_cells".into(), json!(grid.failed_cells()));
    info.insert("ridge".into(), Value::Array(ridge));
    Ok((rows, info))
}

fn gate_fidelity(cfg: &ScenarioConfig, p: &DriveParams) -> Result<(usize, Map<String, Value>), CliError> {
    let mut csv = CsvTable::create(&cfg.out, &["t_us", "fbar"])?;
    let t_gate = gate_time(p.omega_m, p.omega, p.gate);
    let grid = TimeGrid::with_divisor(p, 0.0, t_gate, cfg.dt_divisor)?;
    let report = fidelity_time_series(p, &grid, cfg.grid_n)?;
    for (t, f) in report.times.iter().zip(&report.fbar) {
        csv.row(&[Some(seconds_to_us(*t)), Some(*f)])?;
    }
    csv.finish()?;
    let mut info = Map::new();
    info.insert("grid".into(), grid_json(&grid));
    info.insert("gate_time_s".into(), json!(t_gate));
    info.insert("final_fbar".into(), json!(report.final_fbar));
    info.insert(
        "convergence".into(),
        json!({ "quadrature_grid_n": report.grid_n, "quadrature_delta": report.convergence_delta }),
    );
    Ok((report.times.len(), info))
}

fn fidelity_gamma(cfg: &ScenarioConfig, p: &DriveParams) -> Result<(usize, Map<String, Value>), CliError> {
    let mut csv = CsvTable::create(&cfg.out, &["gamma_khz", "fbar_final"])?;
    let gammas = gamma_ladder(khz_to_angular(cfg.gamma_max_khz), cfg.gamma_points);
    let curve = fidelity_vs_gamma(p, &gammas, cfg.grid_n, cfg.dt_divisor)?;
    for (g, f) in &curve {
        csv.row(&[Some(angular_to_khz(*g)), Some(*f)])?;
    }
    csv.finish()?;
    let mut info = Map::new();
    info.insert("gate_time_s".into(), json!(gate_time(p.omega_m, p.omega, p.gate)));
    info.insert("dt_divisor".into(), json!(cfg.dt_divisor));
    info.insert("convergence".into(), json!({ "quadrature_grid_n": cfg.grid_n }));
    info.insert(
        "points".into(),
        Value::Array(curve.iter().map(|(g, f)| json!({ "gamma_rad_s": g, "fbar_final": f })).collect()),
    );
    Ok((curve.len(), info))
}
