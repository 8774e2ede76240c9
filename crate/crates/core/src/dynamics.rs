//! Fixed-step RK4 propagation of pure states, density matrices and process maps.
//!
//! Steps never exceed `(2π/ω_fast)/50` with `ω_fast = max(V, 2ω, Ω_m)`.
//! Density matrices are re-Hermitized after every step but never
//! renormalized, so trace drift stays observable as a health metric.

use std::f64::consts::TAU;

use nalgebra::SMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{
    hermitian_part, min_eigenvalue, DensityMatrix, StateVector, TwoAtomIndex, TwoAtomOperator, C64, DIM, I, ONE,
    QUBIT_INDICES, ZERO,
};
use crate::models::{drive_envelope, drive_operator, DriveParams};

/// Minimum number of steps per period of the fastest frequency.
pub const MIN_DT_DIVISOR: f64 = 50.0;
/// Steps per fastest period used unless a caller asks otherwise.
pub const DEFAULT_DT_DIVISOR: f64 = 400.0;
pub const DEFAULT_MAX_SAMPLES: usize = 2000;
/// Norm, trace and positivity drift beyond which propagation is aborted.
pub const HEALTH_TOL: f64 = 1e-6;
/// Pass threshold for [`convergence_check`].
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Largest admissible step for `params` at `divisor` steps per fastest period.
pub fn max_dt(params: &DriveParams, divisor: f64) -> f64 {
    TAU / params.fastest_frequency() / divisor
}

/// Uniform time grid with sampling stride. The final step always lands exactly
/// on `t_end` and is always sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    dt: f64,
    steps: usize,
    sample_stride: usize,
}

impl TimeGrid {
    /// Grid with a requested step, shrunk so that it divides the span. Fails if
    /// `dt` exceeds [`max_dt`] at [`MIN_DT_DIVISOR`].
    pub fn new(params: &DriveParams, t_start: f64, t_end: f64, dt: f64, sample_stride: usize) -> Result<Self> {
        let cap = max_dt(params, MIN_DT_DIVISOR);
        if dt > cap * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!("dt = {dt:e} s exceeds cap {cap:e} s")));
        }
        Self::new_unchecked(t_start, t_end, dt, sample_stride)
    }

    /// Grid at `divisor` steps per fastest period (`divisor ≥ 50`), storing at
    /// most [`DEFAULT_MAX_SAMPLES`] samples.
    pub fn with_divisor(params: &DriveParams, t_start: f64, t_end: f64, divisor: f64) -> Result<Self> {
        if !(divisor >= MIN_DT_DIVISOR) {
            return Err(Error::InvalidGrid(format!("dt divisor {divisor} below minimum {MIN_DT_DIVISOR}")));
        }
        Ok(Self::new(params, t_start, t_end, max_dt(params, divisor), 1)?.with_max_samples(DEFAULT_MAX_SAMPLES))
    }

    /// Grid at [`DEFAULT_DT_DIVISOR`].
    pub fn for_params(params: &DriveParams, t_start: f64, t_end: f64) -> Result<Self> {
        Self::with_divisor(params, t_start, t_end, DEFAULT_DT_DIVISOR)
    }

    /// Grid without the step-size cap, for convergence studies.
    pub fn new_unchecked(t_start: f64, t_end: f64, dt: f64, sample_stride: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::InvalidGrid(format!("need t_end > t_start, got [{t_start}, {t_end}]")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive")));
        }
        if sample_stride == 0 {
            return Err(Error::InvalidGrid("sample stride must be ≥ 1".into()));
        }
        let span = t_end - t_start;
        let steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Self { t_start, t_end, dt: span / steps as f64, steps, sample_stride })
    }

    pub fn with_sample_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride.max(1);
        self
    }

    /// Chooses the smallest stride that stores at most `max_samples` points
    /// (plus the always-kept endpoint).
    pub fn with_max_samples(self, max_samples: usize) -> Self {
        let stride = self.steps.div_ceil(max_samples.max(1)).max(1);
        self.with_sample_stride(stride)
    }

    /// Same span with the step divided by `factor` and the stride multiplied,
    /// so sample times are unchanged.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            dt: self.dt / factor as f64,
            steps: self.steps * factor,
            sample_stride: self.sample_stride * factor,
            ..*self
        }
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sample_stride(&self) -> usize {
        self.sample_stride
    }

    fn time_at(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            self.t_start + step as f64 * self.dt
        }
    }

    fn is_sample(&self, step: usize) -> bool {
        step % self.sample_stride == 0 || step == self.steps
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.steps).filter(|&k| self.is_sample(k)).map(|k| self.time_at(k)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub params: DriveParams,
    pub dt: f64,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory always holds the initial sample")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `i(ρH − Hρ) + ½Σ_k(2L_kρL_k† − L_k†L_kρ − ρL_k†L_k)`, for any operators.
pub fn lindblad_rhs(rho: &TwoAtomOperator, h: &TwoAtomOperator, ls: &[TwoAtomOperator]) -> TwoAtomOperator {
    let mut out = (rho * h - h * rho) * I;
    for l in ls {
        let l_dag = l.adjoint();
        let ldl = l_dag * l;
        out += ((l * rho * l_dag).scale(2.0) - (ldl * rho + rho * ldl)).scale(0.5);
    }
    out
}

/// The equations of motion for one parameter set, with the decay channels
/// specialised to their sparse structure.
#[derive(Clone, Debug)]
pub(crate) struct Generator {
    params: DriveParams,
    drive: TwoAtomOperator,
    /// Diagonal of `Σ_k L_k†L_k`: `γ × (number of Rydberg excitations)`.
    decay: [f64; DIM],
}

impl Generator {
    pub(crate) fn new(params: &DriveParams) -> Self {
        let decay = std::array::from_fn(|i| {
            let s = TwoAtomIndex::from_index(i).expect("index below DIM");
            params.gamma * s.excitations() as f64
        });
        Self { params: *params, drive: drive_operator(params.gate), decay }
    }

    fn hamiltonian(&self, t: f64) -> TwoAtomOperator {
        let mut h = self.drive.scale(drive_envelope(&self.params, t));
        h[(DIM - 1, DIM - 1)] += C64::from(self.params.v);
        h
    }

    fn schrodinger(&self, t: f64, psi: &StateVector) -> StateVector {
        (self.hamiltonian(t) * psi) * (-I)
    }

    /// Lindblad right-hand side for Hermitian `rho`: with the non-Hermitian
    /// `K = H − (i/2)Σ L†L` it reads `−i(Kρ − (Kρ)†) + Σ LρL†`.
    fn lindblad(&self, t: f64, rho: &TwoAtomOperator) -> TwoAtomOperator {
        let mut k = self.hamiltonian(t);
        for (i, d) in self.decay.iter().enumerate() {
            k[(i, i)] -= I * (0.5 * d);
        }
        let x = k * rho;
        let mut out = (x - x.adjoint()) * (-I);
        if self.params.gamma > 0.0 {
            let rate = C64::from(0.5 * self.params.gamma);
            let ryd = 2;
            for g in 0..2 {
                for n in 0..3 {
                    for n2 in 0..3 {
                        // atom 1: |r n⟩⟨r n'| → |g n⟩⟨g n'|
                        out[(3 * g + n, 3 * g + n2)] += rate * rho[(3 * ryd + n, 3 * ryd + n2)];
                        // atom 2: |n r⟩⟨n' r| → |n g⟩⟨n' g|
                        out[(3 * n + g, 3 * n2 + g)] += rate * rho[(3 * n + ryd, 3 * n2 + ryd)];
                    }
                }
            }
        }
        out
    }
}

fn rk4_step<const R: usize, const C: usize>(
    y: &SMatrix<C64, R, C>,
    t: f64,
    dt: f64,
    f: &impl Fn(f64, &SMatrix<C64, R, C>) -> SMatrix<C64, R, C>,
) -> SMatrix<C64, R, C> {
    let half = 0.5 * dt;
    let k1 = f(t, y);
    let k2 = f(t + half, &(y + k1.scale(half)));
    let k3 = f(t + half, &(y + k2.scale(half)));
    let k4 = f(t + dt, &(y + k3.scale(dt)));
    y + (k1 + (k2 + k3).scale(2.0) + k4).scale(dt / 6.0)
}

pub fn propagate_state(params: &DriveParams, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory<StateVector>> {
    params.validate()?;
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!("initial state norm {norm0} ≠ 1")));
    }
    let gen = Generator::new(params);
    let f = |t: f64, psi: &StateVector| gen.schrodinger(t, psi);

    let mut times = vec![grid.t_start];
    let mut states = vec![*psi0];
    let mut psi = *psi0;
    for step in 1..=grid.steps {
        let t = grid.time_at(step - 1);
        psi = rk4_step(&psi, t, grid.dt, &f);
        if grid.is_sample(step) {
            let t = grid.time_at(step);
            let drift = (psi.norm() - 1.0).abs();
            if !(drift <= HEALTH_TOL) {
                return Err(Error::IntegratorHealth { t, reason: format!("norm drift {drift:e}") });
            }
            times.push(t);
            states.push(psi);
        }
    }
    Ok(Trajectory { times, states, params: *params, dt: grid.dt })
}

#[derive(Clone, Copy, Debug)]
struct Health {
    trace: C64,
    positivity: bool,
    enabled: bool,
}

/// Raw Hermitian-matrix propagation, returning the sampled matrices.
fn propagate_matrix(
    gen: &Generator,
    rho0: &TwoAtomOperator,
    grid: &TimeGrid,
    health: Health,
) -> Result<Vec<TwoAtomOperator>> {
    let f = |t: f64, rho: &TwoAtomOperator| gen.lindblad(t, rho);
    let mut out = Vec::with_capacity(grid.steps / grid.sample_stride + 2);
    out.push(*rho0);
    let mut rho = *rho0;
    for step in 1..=grid.steps {
        let t = grid.time_at(step - 1);
        rho = hermitian_part(&rk4_step(&rho, t, grid.dt, &f));
        if grid.is_sample(step) {
            if health.enabled {
                check_health(&rho, grid.time_at(step), health)?;
            }
            out.push(rho);
        }
    }
    Ok(out)
}

fn check_health(rho: &TwoAtomOperator, t: f64, health: Health) -> Result<()> {
    let drift = (rho.trace() - health.trace).norm();
    if !(drift <= HEALTH_TOL) {
        return Err(Error::IntegratorHealth { t, reason: format!("trace drift {drift:e}") });
    }
    if health.positivity {
        let lmin = min_eigenvalue(rho);
        if !(lmin >= -HEALTH_TOL) {
            return Err(Error::IntegratorHealth { t, reason: format!("min eigenvalue {lmin:e}") });
        }
    }
    Ok(())
}

pub fn propagate_density(
    params: &DriveParams,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory<DensityMatrix>> {
    params.validate()?;
    let health = Health { trace: rho0.trace(), positivity: true, enabled: true };
    let mats = propagate_matrix(&Generator::new(params), rho0.matrix(), grid, health)?;
    Ok(Trajectory {
        times: grid.sample_times(),
        states: mats.into_iter().map(DensityMatrix::new_unchecked).collect(),
        params: *params,
        dt: grid.dt,
    })
}

/// Number of qubit-subspace basis matrices `|k⟩⟨l|`.
pub const PROCESS_BASIS_LEN: usize = 16;

pub type ProcessImages = [TwoAtomOperator; PROCESS_BASIS_LEN];

/// `|q_i⟩⟨q_j|` at slot `4i + j`, with `q` running over `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn process_basis() -> ProcessImages {
    std::array::from_fn(|k| {
        let mut m = TwoAtomOperator::zeros();
        m[(QUBIT_INDICES[k / 4], QUBIT_INDICES[k % 4])] = ONE;
        m
    })
}

/// The linear map `ρ(t_start) ↦ ρ(t_end)` restricted to inputs supported on
/// the qubit subspace, stored as the images of `|k⟩⟨l|`.
#[derive(Clone, Debug)]
pub struct ProcessMap {
    basis_out: ProcessImages,
    pub params: DriveParams,
    pub grid: TimeGrid,
}

impl ProcessMap {
    pub fn from_images(basis_out: ProcessImages, params: DriveParams, grid: TimeGrid) -> Self {
        Self { basis_out, params, grid }
    }

    /// The map `ρ ↦ UρU†`.
    pub fn from_unitary(u: &TwoAtomOperator, params: DriveParams, grid: TimeGrid) -> Self {
        let images = process_basis().map(|b| u * b * u.adjoint());
        Self::from_images(images, params, grid)
    }

    pub fn basis_in(&self) -> ProcessImages {
        process_basis()
    }

    pub fn basis_out(&self) -> &ProcessImages {
        &self.basis_out
    }

    /// Image of `|q_i⟩⟨q_j|`, `i, j ∈ 0..4`.
    pub fn image(&self, i: usize, j: usize) -> &TwoAtomOperator {
        &self.basis_out[4 * i + j]
    }

    /// Image of the qubit-subspace block of `rho0`; other entries are ignored.
    pub fn apply(&self, rho0: &TwoAtomOperator) -> TwoAtomOperator {
        let mut out = TwoAtomOperator::zeros();
        for (i, &a) in QUBIT_INDICES.iter().enumerate() {
            for (j, &b) in QUBIT_INDICES.iter().enumerate() {
                let c = rho0[(a, b)];
                if c != ZERO {
                    out += self.image(i, j) * c;
                }
            }
        }
        out
    }
}

/// Process images at every sample time of one propagation.
#[derive(Clone, Debug)]
pub struct ProcessHistory {
    pub times: Vec<f64>,
    pub images: Vec<ProcessImages>,
    pub params: DriveParams,
    pub grid: TimeGrid,
}

impl ProcessHistory {
    pub fn map_at(&self, sample: usize) -> ProcessMap {
        ProcessMap::from_images(self.images[sample], self.params, self.grid)
    }

    pub fn final_map(&self) -> ProcessMap {
        self.map_at(self.images.len() - 1)
    }
}

/// Hermitian inputs spanning the qubit block: `|i⟩⟨i|`, `|i⟩⟨j| + |j⟩⟨i|` and
/// `i(|i⟩⟨j| − |j⟩⟨i|)` for `i < j`, tagged by the pair they belong to.
fn hermitian_process_inputs() -> Vec<(usize, usize, bool, TwoAtomOperator)> {
    let mut out = Vec::with_capacity(PROCESS_BASIS_LEN);
    for i in 0..4 {
        for j in i..4 {
            let (a, b) = (QUBIT_INDICES[i], QUBIT_INDICES[j]);
            let mut x = TwoAtomOperator::zeros();
            x[(a, b)] = ONE;
            x[(b, a)] = ONE;
            if i == j {
                x[(a, a)] = ONE;
                out.push((i, j, false, x));
                continue;
            }
            let mut y = TwoAtomOperator::zeros();
            y[(a, b)] = I;
            y[(b, a)] = -I;
            out.push((i, j, false, x));
            out.push((i, j, true, y));
        }
    }
    out
}

pub fn propagate_process_history(params: &DriveParams, grid: &TimeGrid) -> Result<ProcessHistory> {
    params.validate()?;
    let gen = Generator::new(params);
    let inputs = hermitian_process_inputs();
    let runs: Vec<Vec<TwoAtomOperator>> = inputs
        .par_iter()
        .map(|(_, _, _, m)| {
            let health = Health { trace: m.trace(), positivity: false, enabled: true };
            propagate_matrix(&gen, m, grid, health)
        })
        .collect::<Result<_>>()?;

    let times = grid.sample_times();
    let images = (0..times.len())
        .map(|s| {
            let mut out: ProcessImages = [TwoAtomOperator::zeros(); PROCESS_BASIS_LEN];
            let mut k = 0;
            while k < inputs.len() {
                let (i, j, _, _) = inputs[k];
                if i == j {
                    out[4 * i + j] = runs[k][s];
                    k += 1;
                } else {
                    // |i⟩⟨j| = (X − iY)/2, |j⟩⟨i| = (X + iY)/2
                    let (x, y) = (runs[k][s], runs[k + 1][s] * I);
                    out[4 * i + j] = (x - y).scale(0.5);
                    out[4 * j + i] = (x + y).scale(0.5);
                    k += 2;
                }
            }
            out
        })
        .collect();
    Ok(ProcessHistory { times, images, params: *params, grid: *grid })
}

pub fn propagate_process(params: &DriveParams, grid: &TimeGrid) -> Result<ProcessMap> {
    let final_only = grid.with_sample_stride(grid.steps);
    Ok(propagate_process_history(params, &final_only)?.final_map())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub dt: f64,
    pub coarse: f64,
    pub fine: f64,
    pub delta: f64,
    pub passed: bool,
}

/// Evaluates `observable` on density trajectories at `dt` and `dt/2` and
/// compares them against [`CONVERGENCE_TOL`]. Health checks are disabled so
/// deliberately coarse grids still report.
pub fn convergence_check(
    params: &DriveParams,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    observable: impl Fn(&Trajectory<DensityMatrix>) -> f64,
) -> Result<ConvergenceReport> {
    params.validate()?;
    let gen = Generator::new(params);
    let health = Health { trace: rho0.trace(), positivity: false, enabled: false };
    let run = |g: &TimeGrid| -> Result<f64> {
        let mats = propagate_matrix(&gen, rho0.matrix(), g, health)?;
        Ok(observable(&Trajectory {
            times: g.sample_times(),
            states: mats.into_iter().map(DensityMatrix::new_unchecked).collect(),
            params: *params,
            dt: g.dt,
        }))
    };
    let coarse = run(grid)?;
    let fine = run(&grid.refined(2))?;
    let delta = (coarse - fine).abs();
    Ok(ConvergenceReport { dt: grid.dt, coarse, fine, delta, passed: delta <= CONVERGENCE_TOL })
}
