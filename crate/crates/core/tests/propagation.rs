use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use rabsim::analysis::product_state;
use rabsim::dynamics::{
    convergence_check, max_dt, propagate_density, propagate_process, propagate_state, ProcessMap, MIN_DT_DIVISOR,
};
use rabsim::hilbert::{basis::*, basis_vector, max_abs, DensityMatrix, QUBIT_INDICES};
use rabsim::models::{antiblockade_time, gate_time};
use rabsim::units::{khz_to_angular, mhz_to_angular};
use rabsim::{DriveParams, GateKind, StateVector, TimeGrid, TwoAtomOperator, C64};

fn reference(gate: GateKind, gamma: f64) -> DriveParams {
    let om = mhz_to_angular(2.0);
    DriveParams::at_resonance(om, 7.5 * om, gamma, gate).unwrap()
}

fn t_ab(p: &DriveParams) -> f64 {
    antiblockade_time(p.omega_m, p.omega)
}

fn p_rr_final(traj: &rabsim::Trajectory<DensityMatrix>) -> f64 {
    traj.last().matrix()[(SRR.index(), SRR.index())].re
}

#[test]
fn density_and_state_agree_without_decay() {
    let p = reference(GateKind::Cz, 0.0);
    let grid = TimeGrid::for_params(&p, 0.0, t_ab(&p)).unwrap().with_max_samples(200);
    let mut mixed = StateVector::from_fn(|k, _| C64::new(1.0 + k as f64, 0.5 * k as f64));
    mixed.normalize_mut();
    for psi in [basis_vector(S11), product_state(0.3, 1.1), mixed] {
        let pure = propagate_state(&p, &psi, &grid).unwrap();
        let dens = propagate_density(&p, &DensityMatrix::from_pure(&psi).unwrap(), &grid).unwrap();
        assert_eq!(pure.times, dens.times);
        for (s, rho) in pure.states.iter().zip(&dens.states) {
            let pops = rho.populations();
            for k in 0..9 {
                assert!((s[k].norm_sqr() - pops[k]).abs() <= 1e-8);
            }
            assert!((rho.purity() - 1.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn ground_pair_never_reaches_rr() {
    let p = reference(GateKind::Cz, 0.0);
    let grid = TimeGrid::for_params(&p, 0.0, gate_time(p.omega_m, p.omega, GateKind::Cz)).unwrap();
    let traj = propagate_state(&p, &basis_vector(S00), &grid).unwrap();
    for s in &traj.states {
        assert!(s[SRR.index()].norm() <= 1e-10);
        assert!((s[S00.index()].norm_sqr() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn propagation_is_deterministic() {
    let p = reference(GateKind::Cnot, khz_to_angular(1.5));
    let grid = TimeGrid::for_params(&p, 0.0, 0.3e-6).unwrap();
    let rho = DensityMatrix::from_pure(&product_state(0.7, 2.1)).unwrap();
    let a = propagate_density(&p, &rho, &grid).unwrap();
    let b = propagate_density(&p, &rho, &grid).unwrap();
    assert_eq!(a.times, b.times);
    assert!(a.states.iter().zip(&b.states).all(|(x, y)| x.matrix() == y.matrix()));
    let m1 = propagate_process(&p, &grid).unwrap();
    let m2 = propagate_process(&p, &grid).unwrap();
    assert_eq!(m1.basis_out(), m2.basis_out());
}

#[test]
fn undriven_state_is_stationary() {
    let mut p = reference(GateKind::Cz, 0.0);
    p.omega_m = 0.0;
    let grid = TimeGrid::for_params(&p, 0.0, 1e-6).unwrap();
    let traj = propagate_state(&p, &basis_vector(S11), &grid).unwrap();
    assert!(traj.states.iter().all(|s| (s[S11.index()].norm_sqr() - 1.0).abs() <= 1e-14));
}

#[test]
fn convergence_at_default_step() {
    let p = reference(GateKind::Cz, 0.0);
    let grid = TimeGrid::for_params(&p, 0.0, t_ab(&p)).unwrap();
    let report = convergence_check(&p, &DensityMatrix::basis_state(S11), &grid, p_rr_final).unwrap();
    assert!(report.passed, "{report:?}");
    assert!(report.fine > 0.95);
}

#[test]
fn convergence_of_undriven_run_is_exact() {
    let mut p = reference(GateKind::Cz, 0.0);
    p.omega_m = 0.0;
    let grid = TimeGrid::for_params(&p, 0.0, 1e-6).unwrap();
    let report = convergence_check(&p, &DensityMatrix::basis_state(S11), &grid, p_rr_final).unwrap();
    assert_eq!(report.delta, 0.0);
    assert!(report.passed);
}

#[test]
fn convergence_flags_coarse_step() {
    let p = reference(GateKind::Cz, 0.0);
    let dt = 10.0 * max_dt(&p, MIN_DT_DIVISOR);
    assert!(TimeGrid::new(&p, 0.0, t_ab(&p), dt, 1).is_err());
    let grid = TimeGrid::new_unchecked(0.0, t_ab(&p), dt, 1).unwrap();
    let report = convergence_check(&p, &DensityMatrix::basis_state(S11), &grid, p_rr_final).unwrap();
    assert!(!report.passed, "{report:?}");
    assert!(report.delta > 1e-6);
}

#[test]
fn undriven_lossless_process_is_identity() {
    let mut p = reference(GateKind::Cz, 0.0);
    p.omega_m = 0.0;
    let grid = TimeGrid::for_params(&p, 0.0, 0.5e-6).unwrap();
    let map = propagate_process(&p, &grid).unwrap();
    for (out, inp) in map.basis_out().iter().zip(map.basis_in().iter()) {
        assert!(max_abs(&(out - inp)) <= 1e-12);
    }
}

#[test]
fn exact_unitary_process_applies_conjugation() {
    let p = reference(GateKind::Cz, 0.0);
    let grid = TimeGrid::for_params(&p, 0.0, 1e-7).unwrap();
    let u = rabsim::models::target_unitary(GateKind::Cnot);
    let map = ProcessMap::from_unitary(&u, p, grid);
    let rho = DensityMatrix::from_pure(&product_state(1.0, 0.4)).unwrap();
    assert!(max_abs(&(map.apply(rho.matrix()) - u * rho.matrix() * u.adjoint())) <= 1e-14);
}

fn decaying_map() -> &'static ProcessMap {
    static MAP: OnceLock<ProcessMap> = OnceLock::new();
    MAP.get_or_init(|| {
        let p = reference(GateKind::Cz, khz_to_angular(150.0));
        propagate_process(&p, &short_grid(&p)).unwrap()
    })
}

fn short_grid(p: &DriveParams) -> TimeGrid {
    let g = TimeGrid::for_params(p, 0.0, 0.4e-6).unwrap();
    g.with_sample_stride(g.steps())
}

fn qubit_density(weights: &[f64], phases: &[f64]) -> TwoAtomOperator {
    let mut rho = TwoAtomOperator::zeros();
    let total: f64 = weights.iter().sum();
    for (k, (&w, &ph)) in weights.iter().zip(phases).enumerate() {
        let mut psi = StateVector::zeros();
        psi[QUBIT_INDICES[k]] = C64::from(1.0);
        psi[QUBIT_INDICES[(k + 1) % 4]] = C64::from_polar(0.8, ph);
        psi.normalize_mut();
        rho += psi * psi.adjoint() * C64::from(w / total);
    }
    rho
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn process_map_is_linear_and_trace_preserving(
        weights in prop::collection::vec(0.05f64..1.0, 4),
        phases in prop::collection::vec(0.0f64..(2.0 * PI), 4),
    ) {
        let map = decaying_map();
        let rho0 = qubit_density(&weights, &phases);
        let direct = propagate_density(&map.params, &DensityMatrix::new(rho0).unwrap(), &short_grid(&map.params)).unwrap();
        let image = map.apply(&rho0);
        prop_assert!(max_abs(&(image - direct.last().matrix())) <= 1e-8);
        prop_assert!((image.trace() - C64::from(1.0)).norm() <= 1e-8);
    }
}
