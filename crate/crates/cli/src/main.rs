use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rabsim_cli::config::{parse_config, parse_config_file, RawConfig, Scenario};
use rabsim_cli::{run_scenario, CliError, EXIT_OK};

/// Two-atom Rydberg antiblockade simulator.
#[derive(Parser, Debug)]
#[command(name = "rabsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// |11⟩ and |rr⟩ populations from |11⟩ over two transfer times.
    RabPopulations(Common),
    /// |rr⟩ population at the transfer time over a (V, ω) grid.
    Heatmap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ranges: HeatmapArgs,
    },
    /// Average gate fidelity over the gate time.
    GateFidelity(Common),
    /// Final average gate fidelity against the decay rate.
    FidelityVsGamma {
        #[command(flatten)]
        common: Common,
        /// Largest decay rate (kHz, cyclic).
        #[arg(long, allow_hyphen_values = true)]
        gamma_max_khz: Option<String>,
        /// Number of decay rates from 0 to the maximum.
        #[arg(long, allow_hyphen_values = true)]
        gamma_points: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// cz or cnot.
    #[arg(long, allow_hyphen_values = true)]
    gate: Option<String>,
    /// Peak Rabi frequency Ω_m/2π in MHz.
    #[arg(long, allow_hyphen_values = true)]
    omega_m_mhz: Option<String>,
    /// ω/Ω_m.
    #[arg(long, allow_hyphen_values = true)]
    omega_ratio: Option<String>,
    /// Decay rate γ/2π in kHz.
    #[arg(long, allow_hyphen_values = true)]
    gamma_khz: Option<String>,
    /// V/Ω_m, overriding the resonance condition.
    #[arg(long, allow_hyphen_values = true)]
    v_over_om: Option<String>,
    /// Quadrature points per axis.
    #[arg(long, allow_hyphen_values = true)]
    grid_n: Option<String>,
    /// Steps per period of the fastest frequency.
    #[arg(long, allow_hyphen_values = true)]
    dt_divisor: Option<String>,
    /// Output CSV; the JSON sidecar takes the same name with a .json extension.
    #[arg(long, allow_hyphen_values = true)]
    out: Option<String>,
    /// key = value configuration file.
    #[arg(long, allow_hyphen_values = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    #[arg(long, allow_hyphen_values = true)]
    v_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v_points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    w_points: Option<String>,
}

fn insert(raw: &mut RawConfig, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        raw.insert(key.to_string(), v.clone());
    }
}

impl Common {
    fn raw(&self) -> RawConfig {
        let mut raw = RawConfig::new();
        insert(&mut raw, "gate", &self.gate);
        insert(&mut raw, "omega_m_mhz", &self.omega_m_mhz);
        insert(&mut raw, "omega_ratio", &self.omega_ratio);
        insert(&mut raw, "gamma_khz", &self.gamma_khz);
        insert(&mut raw, "v_over_om", &self.v_over_om);
        insert(&mut raw, "grid_n", &self.grid_n);
        insert(&mut raw, "dt_divisor", &self.dt_divisor);
        insert(&mut raw, "out", &self.out);
        raw
    }
}

fn resolve(command: Command) -> (Scenario, Option<PathBuf>, RawConfig) {
    match command {
        Command::RabPopulations(c) => (Scenario::RabPopulations, c.config.clone(), c.raw()),
        Command::GateFidelity(c) => (Scenario::GateFidelity, c.config.clone(), c.raw()),
        Command::Heatmap { common, ranges } => {
            let mut raw = common.raw();
            insert(&mut raw, "v_min", &ranges.v_min);
            insert(&mut raw, "v_max", &ranges.v_max);
            insert(&mut raw, "v_points", &ranges.v_points);
            insert(&mut raw, "w_min", &ranges.w_min);
            insert(&mut raw, "w_max", &ranges.w_max);
            insert(&mut raw, "w_points", &ranges.w_points);
            (Scenario::Heatmap, common.config, raw)
        }
        Command::FidelityVsGamma { common, gamma_max_khz, gamma_points } => {
            let mut raw = common.raw();
            insert(&mut raw, "gamma_max_khz", &gamma_max_khz);
            insert(&mut raw, "gamma_points", &gamma_points);
            (Scenario::FidelityVsGamma, common.config, raw)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("RABSIM_THREADS") else {
        return Ok(());
    };
    let n: usize =
        value.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            CliError::Validation(vec![format!("RABSIM_THREADS: `{value}` must be a positive integer")])
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(vec![format!("RABSIM_THREADS: {e}")]))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (scenario, config_path, flags) = resolve(cli.command);
    let file = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Some(parse_config_file(&text)?)
        }
        None => None,
    };
    let cfg = parse_config(scenario, file.as_ref(), &flags)?;
    log::info!("running {scenario} with {cfg:?}");
    let summary = run_scenario(&cfg)?;
    println!("wrote {} rows to {} ({})", summary.rows, summary.csv.display(), summary.sidecar.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match execute(Cli::parse()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprint!("rabsim: {e}");
            if !e.to_string().ends_with('\n') {
                eprintln!();
            }
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
