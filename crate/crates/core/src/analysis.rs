//! Observables built on top of the propagators: populations, the exact
//! single-atom oracle, average gate fidelities and parameter sweeps.

use std::f64::consts::TAU;

use nalgebra::SMatrix;
use rayon::prelude::*;

use crate::dynamics::{
    propagate_density, propagate_process, propagate_process_history, propagate_state, ProcessImages, ProcessMap,
    TimeGrid,
};
use crate::error::{Error, Result};
use crate::hilbert::{basis::*, basis_vector, DensityMatrix, StateVector, TwoAtomOperator, C64, I, QUBIT_INDICES};
use crate::models::{antiblockade_time, gate_time, target_unitary, DriveParams, GateKind};

/// Default quadrature points per axis for the product-state average.
pub const DEFAULT_GRID_N: usize = 16;
pub const MIN_GRID_N: usize = 4;
/// Largest accepted change of the fidelity between `N` and `2N` points.
pub const QUADRATURE_TOL: f64 = 1e-4;

/// `⟨φ|ρ|φ⟩` for a normalized `φ`.
pub fn population(rho: &TwoAtomOperator, phi: &StateVector) -> f64 {
    let p = phi.dotc(&(rho * phi));
    debug_assert!(p.im.abs() <= 1e-10, "complex population {p}");
    p.re
}

/// Single-atom pulse area `∫₀ᵗ Ω(s) ds = (Ω_m/ω) sin(ωt)`.
pub fn pulse_area(params: &DriveParams, t: f64) -> f64 {
    params.omega_m / params.omega * (params.omega * t).sin()
}

/// Exact propagator of a single driven atom paired with an idle `|0⟩`
/// partner (the `{|01⟩, |0r⟩}` and `{|10⟩, |r0⟩}` blocks under CZ driving),
/// in the `(|1⟩, |r⟩)` basis. The drive commutes with itself at all times, so
/// the evolution is a rotation by the pulse area.
pub fn single_atom_oracle(params: &DriveParams, t: f64) -> Result<SMatrix<C64, 2, 2>> {
    if params.gate != GateKind::Cz {
        return Err(Error::Precondition("single-atom oracle is exact only for CZ driving".into()));
    }
    let theta = pulse_area(params, t);
    let (c, s) = (C64::from(theta.cos()), -I * theta.sin());
    Ok(SMatrix::<C64, 2, 2>::new(c, s, s, c))
}

/// `(cos α|0⟩ + sin α|1⟩) ⊗ (cos β|0⟩ + sin β|1⟩)`
pub fn product_state(alpha: f64, beta: f64) -> StateVector {
    let amps = product_amplitudes(alpha, beta);
    let mut psi = StateVector::zeros();
    for (a, &idx) in amps.iter().zip(QUBIT_INDICES.iter()) {
        psi[idx] = C64::from(*a);
    }
    psi
}

fn product_amplitudes(alpha: f64, beta: f64) -> [f64; 4] {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    [ca * cb, ca * sb, sa * cb, sa * sb]
}

fn midpoints(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| TAU * (i as f64 + 0.5) / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityReport {
    pub times: Vec<f64>,
    pub fbar: Vec<f64>,
    pub final_fbar: f64,
    pub grid_n: usize,
    /// Largest `|F̄(N) − F̄(2N)|` over the reported times.
    pub convergence_delta: f64,
}

/// `⟨U q_m| E(|q_k⟩⟨q_l|) |U q_n⟩` at slot `[k][l][m][n]`; the fidelity of a
/// real product input `a` is the quartic form `Σ a_k a_l a_m a_n M_klmn`.
struct FidelityKernel([[[[f64; 4]; 4]; 4]; 4]);

impl FidelityKernel {
    fn new(images: &ProcessImages, u: &TwoAtomOperator) -> Self {
        let targets: [StateVector; 4] = std::array::from_fn(|m| u * basis_vector(QUBIT[m]));
        let mut out = [[[[0.0; 4]; 4]; 4]; 4];
        for (k, row) in out.iter_mut().enumerate() {
            for (l, block) in row.iter_mut().enumerate() {
                let img = &images[4 * k + l];
                for (m, line) in block.iter_mut().enumerate() {
                    for (n, x) in line.iter_mut().enumerate() {
                        // imaginary parts cancel between (k,l,m,n) and its transposes
                        *x = targets[m].dotc(&(img * targets[n])).re;
                    }
                }
            }
        }
        Self(out)
    }

    fn eval(&self, a: &[f64; 4]) -> f64 {
        let mut f = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                let akl = a[k] * a[l];
                for m in 0..4 {
                    for n in 0..4 {
                        f += akl * a[m] * a[n] * self.0[k][l][m][n];
                    }
                }
            }
        }
        f
    }

    /// Midpoint rule on the uniform `n × n` grid over `[0, 2π)²`.
    fn average(&self, n: usize) -> f64 {
        let pts = midpoints(n);
        let sum: f64 = pts
            .clone()
            .flat_map(|a| pts.clone().map(move |b| (a, b)))
            .map(|(a, b)| self.eval(&product_amplitudes(a, b)))
            .sum();
        sum / (n * n) as f64
    }

    /// `(F̄(N), |F̄(N) − F̄(2N)|)`
    fn average_checked(&self, n: usize) -> (f64, f64) {
        let f = self.average(n);
        (f, (f - self.average(2 * n)).abs())
    }
}

fn check_grid_n(grid_n: usize) -> Result<()> {
    if grid_n < MIN_GRID_N {
        return Err(Error::InvalidParameter { name: "grid_n", reason: format!("{grid_n} < {MIN_GRID_N}") });
    }
    Ok(())
}

/// Product-state average fidelity of the process against `u`, by midpoint
/// quadrature with a `2·grid_n` resolution check.
pub fn average_gate_fidelity(process: &ProcessMap, u: &TwoAtomOperator, grid_n: usize) -> Result<FidelityReport> {
    check_grid_n(grid_n)?;
    let (f, delta) = FidelityKernel::new(process.basis_out(), u).average_checked(grid_n);
    if !(delta <= QUADRATURE_TOL) {
        return Err(Error::QuadratureResolution { grid_n, delta });
    }
    Ok(FidelityReport {
        times: vec![process.grid.t_end()],
        fbar: vec![f],
        final_fbar: f,
        grid_n,
        convergence_delta: delta,
    })
}

/// Average fidelity against the gate's target at every sample of one
/// process propagation.
pub fn fidelity_time_series(params: &DriveParams, grid: &TimeGrid, grid_n: usize) -> Result<FidelityReport> {
    check_grid_n(grid_n)?;
    let history = propagate_process_history(params, grid)?;
    let u = target_unitary(params.gate);
    let evals: Vec<(f64, f64)> =
        history.images.par_iter().map(|img| FidelityKernel::new(img, &u).average_checked(grid_n)).collect();
    let delta = evals.iter().map(|e| e.1).fold(0.0, f64::max);
    if !(delta <= QUADRATURE_TOL) {
        return Err(Error::QuadratureResolution { grid_n, delta });
    }
    let fbar: Vec<f64> = evals.into_iter().map(|e| e.0).collect();
    Ok(FidelityReport {
        times: history.times,
        final_fbar: *fbar.last().expect("at least one sample"),
        fbar,
        grid_n,
        convergence_delta: delta,
    })
}

/// Same average as [`average_gate_fidelity`] but propagating every
/// quadrature point's initial state directly.
pub fn average_gate_fidelity_direct(
    params: &DriveParams,
    grid: &TimeGrid,
    u: &TwoAtomOperator,
    grid_n: usize,
) -> Result<f64> {
    check_grid_n(grid_n)?;
    let final_only = grid.with_sample_stride(grid.steps());
    let pts: Vec<(f64, f64)> = midpoints(grid_n).flat_map(|a| midpoints(grid_n).map(move |b| (a, b))).collect();
    let values = pts
        .par_iter()
        .map(|&(a, b)| {
            let psi = product_state(a, b);
            let traj = propagate_density(params, &DensityMatrix::from_pure(&psi)?, &final_only)?;
            Ok(population(traj.last().matrix(), &(u * psi)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Axes of the `|rr⟩` population map, in units of `Ω_m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatmapSpec {
    pub v_range: (f64, f64),
    pub w_range: (f64, f64),
    pub v_points: usize,
    pub w_points: usize,
}

impl Default for HeatmapSpec {
    fn default() -> Self {
        Self { v_range: (10.0, 20.0), w_range: (5.0, 10.0), v_points: 60, w_points: 60 }
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `P_|rr⟩` at `t = πω/Ω_m²`, indexed `p_rr[w][v]`. Failed cells are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapGrid {
    pub v_axis: Vec<f64>,
    pub w_axis: Vec<f64>,
    pub p_rr: Vec<Vec<Option<f64>>>,
}

impl HeatmapGrid {
    /// Index into `v_axis` of the largest population for each `ω` row.
    pub fn ridge_argmax(&self) -> Vec<Option<usize>> {
        self.p_rr
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter_map(|(i, p)| p.map(|p| (i, p)))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
            })
            .collect()
    }

    pub fn failed_cells(&self) -> usize {
        self.p_rr.iter().flatten().filter(|p| p.is_none()).count()
    }

    /// `(v, w, p)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, Option<f64>)> + '_ {
        self.w_axis
            .iter()
            .zip(&self.p_rr)
            .flat_map(move |(&w, row)| self.v_axis.iter().zip(row).map(move |(&v, &p)| (v, w, p)))
    }
}

/// Population of `|rr⟩` after starting in `|11⟩` and evolving coherently
/// for `πω/Ω_m²`.
pub fn antiblockade_population(params: &DriveParams, dt_divisor: f64) -> Result<f64> {
    let t = antiblockade_time(params.omega_m, params.omega);
    let grid = TimeGrid::with_divisor(params, 0.0, t, dt_divisor)?;
    let grid = grid.with_sample_stride(grid.steps());
    let traj = propagate_state(params, &basis_vector(S11), &grid)?;
    Ok(traj.last()[SRR.index()].norm_sqr())
}

/// `|rr⟩` population over a `(V/Ω_m, ω/Ω_m)` grid, with `Ω_m`, `γ` (must be 0)
/// and the gate taken from `template`. Cells run in parallel; a cell whose
/// propagation fails is recorded as `None` and the sweep continues.
pub fn sweep_heatmap(template: &DriveParams, spec: &HeatmapSpec, dt_divisor: f64) -> Result<HeatmapGrid> {
    if template.gamma != 0.0 {
        return Err(Error::Precondition("heatmap sweeps coherent dynamics only (γ = 0)".into()));
    }
    for (name, (lo, hi), n) in [("v_range", spec.v_range, spec.v_points), ("w_range", spec.w_range, spec.w_points)] {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("need 0 < lo ≤ hi and points ≥ 1, got [{lo}, {hi}] × {n}"),
            });
        }
    }
    let v_axis = linspace(spec.v_range, spec.v_points);
    let w_axis = linspace(spec.w_range, spec.w_points);
    let om = template.omega_m;
    let cells: Vec<(f64, f64)> = w_axis.iter().flat_map(|&w| v_axis.iter().map(move |&v| (v, w))).collect();
    let values: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(v, w)| {
            let p = DriveParams { omega: w * om, v: v * om, ..*template };
            antiblockade_population(&p, dt_divisor)
                .map_err(|e| log::warn!("heatmap cell V/Ω_m = {v}, ω/Ω_m = {w} failed: {e}"))
                .ok()
        })
        .collect();
    let p_rr = values.chunks(v_axis.len()).map(<[_]>::to_vec).collect();
    Ok(HeatmapGrid { v_axis, w_axis, p_rr })
}

/// Final average fidelity at the gate time for each decay rate.
pub fn fidelity_vs_gamma(
    template: &DriveParams,
    gammas: &[f64],
    grid_n: usize,
    dt_divisor: f64,
) -> Result<Vec<(f64, f64)>> {
    check_grid_n(grid_n)?;
    let t = gate_time(template.omega_m, template.omega, template.gate);
    let u = target_unitary(template.gate);
    gammas
        .par_iter()
        .map(|&gamma| {
            let p = template.with_gamma(gamma)?;
            let grid = TimeGrid::with_divisor(&p, 0.0, t, dt_divisor)?;
            let map = propagate_process(&p, &grid)?;
            Ok((gamma, average_gate_fidelity(&map, &u, grid_n)?.final_fbar))
        })
        .collect()
}

/// `γ` values `0, Δ, …, γ_max` (`points ≥ 2`).
pub fn gamma_ladder(gamma_max: f64, points: usize) -> Vec<f64> {
    linspace((0.0, gamma_max), points.max(2))
}

/// `sin²(Ω_m²t/2ω)`: the effective `|rr⟩` population from `|11⟩`.
pub fn effective_rr_population(params: &DriveParams, t: f64) -> f64 {
    (params.effective_coupling() * t).sin().powi(2)
}
