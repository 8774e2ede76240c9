//! Simulation toolkit for resonant-interaction-induced Rydberg antiblockade
//! in two three-level atoms.
//!
//! * [`hilbert`]: the 9-dimensional two-atom space and its operators.
//! * [`models`]: Hamiltonians, decay channels, interaction conditions,
//!   analytic solutions and second-order effective Hamiltonians.
//! * [`dynamics`]: RK4 propagation of states, density matrices and process maps.
//! * [`analysis`]: populations, average gate fidelities and parameter sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod models;
pub mod units;

pub use analysis::{FidelityReport, HeatmapGrid, HeatmapSpec};
pub use dynamics::{ProcessMap, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use hilbert::{AtomLevel, DensityMatrix, StateVector, TwoAtomIndex, TwoAtomOperator, C64, DIM};
pub use models::{DriveParams, GateKind, HarmonicTerm};
