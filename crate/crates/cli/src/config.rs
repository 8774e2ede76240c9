//! Scenario configuration. Values come from command-line flags, then an
//! optional `key = value` file, then built-in defaults, in that order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rabsim::analysis::{HeatmapSpec, MIN_GRID_N};
use rabsim::dynamics::{DEFAULT_DT_DIVISOR, MIN_DT_DIVISOR};
use rabsim::models::rri_condition;
use rabsim::units::{khz_to_angular, mhz_to_angular};
use rabsim::{DriveParams, GateKind};

use crate::CliError;

/// Unresolved settings keyed by their config-file names.
pub type RawConfig = BTreeMap<String, String>;

pub const KEYS: &[&str] = &[
    "gate",
    "omega_m_mhz",
    "omega_ratio",
    "gamma_khz",
    "v_over_om",
    "grid_n",
    "dt_divisor",
    "out",
    "v_min",
    "v_max",
    "v_points",
    "w_min",
    "w_max",
    "w_points",
    "gamma_max_khz",
    "gamma_points",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    RabPopulations,
    Heatmap,
    GateFidelity,
    FidelityVsGamma,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::RabPopulations => "rab-populations",
            Scenario::Heatmap => "heatmap",
            Scenario::GateFidelity => "gate-fidelity",
            Scenario::FidelityVsGamma => "fidelity-vs-gamma",
        }
    }

    /// Coherent scenarios default to `γ = 0`.
    fn default_gamma_khz(self) -> f64 {
        match self {
            Scenario::RabPopulations | Scenario::Heatmap => 0.0,
            Scenario::GateFidelity | Scenario::FidelityVsGamma => 1.5,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rab-populations" => Ok(Scenario::RabPopulations),
            "heatmap" => Ok(Scenario::Heatmap),
            "gate-fidelity" => Ok(Scenario::GateFidelity),
            "fidelity-vs-gamma" => Ok(Scenario::FidelityVsGamma),
            other => Err(format!("unknown scenario `{other}`")),
        }
    }
}

/// Fully resolved scenario settings, in the units used at the command line.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub gate: GateKind,
    /// Cyclic MHz.
    pub omega_m_mhz: f64,
    /// `ω/Ω_m`.
    pub omega_ratio: f64,
    /// Cyclic kHz.
    pub gamma_khz: f64,
    /// `V/Ω_m`; `None` selects the gate's resonance condition.
    pub v_over_om: Option<f64>,
    pub grid_n: usize,
    pub dt_divisor: f64,
    pub heatmap: HeatmapSpec,
    pub gamma_max_khz: f64,
    pub gamma_points: usize,
    pub out: PathBuf,
}

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        Self {
            scenario,
            gate: GateKind::Cz,
            omega_m_mhz: 2.0,
            omega_ratio: 7.5,
            gamma_khz: scenario.default_gamma_khz(),
            v_over_om: None,
            grid_n: 16,
            dt_divisor: DEFAULT_DT_DIVISOR,
            heatmap: HeatmapSpec::default(),
            gamma_max_khz: 2.0,
            gamma_points: 9,
            out: PathBuf::from(format!("{}.csv", scenario.name())),
        }
    }

    pub fn resolved_v_over_om(&self) -> f64 {
        self.v_over_om.unwrap_or_else(|| rri_condition(1.0, self.omega_ratio, self.gate))
    }

    /// Angular-unit parameters.
    pub fn params(&self) -> rabsim::Result<DriveParams> {
        let om = mhz_to_angular(self.omega_m_mhz);
        DriveParams::new(
            om,
            self.omega_ratio * om,
            self.resolved_v_over_om() * om,
            khz_to_angular(self.gamma_khz),
            self.gate,
        )
    }

    pub fn sidecar_path(&self) -> PathBuf {
        self.out.with_extension("json")
    }

    fn validate(&self, errors: &mut Vec<String>) {
        let mut need = |ok: bool, msg: String| {
            if !ok {
                errors.push(msg);
            }
        };
        need(
            self.omega_m_mhz > 0.0 && self.omega_m_mhz.is_finite(),
            format!("omega_m_mhz: {} must be > 0", self.omega_m_mhz),
        );
        need(
            self.omega_ratio > 0.0 && self.omega_ratio.is_finite(),
            format!("omega_ratio: {} must be > 0", self.omega_ratio),
        );
        need(
            self.gamma_khz >= 0.0 && self.gamma_khz.is_finite(),
            format!("gamma_khz: {} must be >= 0", self.gamma_khz),
        );
        if let Some(v) = self.v_over_om {
            need(v >= 0.0 && v.is_finite(), format!("v_over_om: {v} must be >= 0"));
        }
        need(self.grid_n >= MIN_GRID_N, format!("grid_n: {} must be >= {MIN_GRID_N}", self.grid_n));
        need(
            self.dt_divisor >= MIN_DT_DIVISOR && self.dt_divisor.is_finite(),
            format!("dt_divisor: {} must be >= {MIN_DT_DIVISOR}", self.dt_divisor),
        );
        match self.scenario {
            Scenario::Heatmap => {
                let h = &self.heatmap;
                for (key, (lo, hi)) in [("v", h.v_range), ("w", h.w_range)] {
                    need(
                        lo > 0.0 && hi >= lo && hi.is_finite(),
                        format!("{key}_min/{key}_max: need 0 < min <= max, got [{lo}, {hi}]"),
                    );
                }
                need(h.v_points >= 1, "v_points: must be >= 1".into());
                need(h.w_points >= 1, "w_points: must be >= 1".into());
                need(self.gamma_khz == 0.0, format!("gamma_khz: heatmap is coherent only, got {}", self.gamma_khz));
            }
            Scenario::FidelityVsGamma => {
                need(
                    self.gamma_max_khz > 0.0 && self.gamma_max_khz.is_finite(),
                    format!("gamma_max_khz: {} must be > 0", self.gamma_max_khz),
                );
                need(self.gamma_points >= 2, format!("gamma_points: {} must be >= 2", self.gamma_points));
            }
            Scenario::RabPopulations | Scenario::GateFidelity => {}
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<RawConfig, CliError> {
    let mut raw = RawConfig::new();
    let mut errors = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().replace('-', "_");
                if KEYS.contains(&key.as_str()) {
                    raw.insert(key, v.trim().to_string());
                } else {
                    errors.push(format!("line {}: unknown key `{}`", n + 1, k.trim()));
                }
            }
            None => errors.push(format!("line {}: expected `key = value`", n + 1)),
        }
    }
    if errors.is_empty() {
        Ok(raw)
    } else {
        Err(CliError::Validation(errors))
    }
}

/// Resolves flags over file values over defaults and validates the result,
/// reporting every offending field at once.
pub fn parse_config(
    scenario: Scenario,
    file: Option<&RawConfig>,
    flags: &RawConfig,
) -> Result<ScenarioConfig, CliError> {
    let mut raw = file.cloned().unwrap_or_default();
    raw.extend(flags.iter().map(|(k, v)| (k.clone(), v.clone())));

    let mut cfg = ScenarioConfig::defaults(scenario);
    let mut errors = Vec::new();
    for (key, value) in &raw {
        if let Err(e) = assign(&mut cfg, key, value) {
            errors.push(format!("{key}: {e}"));
        }
    }
    cfg.validate(&mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Validation(errors))
    }
}

fn num<T: FromStr>(value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("cannot parse `{value}`"))
}

fn assign(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "gate" => cfg.gate = value.parse().map_err(|e: rabsim::Error| e.to_string())?,
        "omega_m_mhz" => cfg.omega_m_mhz = num(value)?,
        "omega_ratio" => cfg.omega_ratio = num(value)?,
        "gamma_khz" => cfg.gamma_khz = num(value)?,
        "v_over_om" => cfg.v_over_om = Some(num(value)?),
        "grid_n" => cfg.grid_n = num(value)?,
        "dt_divisor" => cfg.dt_divisor = num(value)?,
        "out" => cfg.out = PathBuf::from(value),
        "v_min" => cfg.heatmap.v_range.0 = num(value)?,
        "v_max" => cfg.heatmap.v_range.1 = num(value)?,
        "v_points" => cfg.heatmap.v_points = num(value)?,
        "w_min" => cfg.heatmap.w_range.0 = num(value)?,
        "w_max" => cfg.heatmap.w_range.1 = num(value)?,
        "w_points" => cfg.heatmap.w_points = num(value)?,
        "gamma_max_khz" => cfg.gamma_max_khz = num(value)?,
        "gamma_points" => cfg.gamma_points = num(value)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}
