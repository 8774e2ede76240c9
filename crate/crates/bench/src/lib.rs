//! Shared fixtures for the benchmarks.

use rabsim::units::{khz_to_angular, mhz_to_angular};
use rabsim::{DriveParams, GateKind};

/// Reference operating point: `Ω_m/2π = 2 MHz`, `ω = 7.5 Ω_m`, Stark-compensated `V`.
pub fn reference_params(gate: GateKind, gamma_khz: f64) -> DriveParams {
    let om = mhz_to_angular(2.0);
    DriveParams::at_resonance(om, 7.5 * om, khz_to_angular(gamma_khz), gate).expect("reference parameters are valid")
}
