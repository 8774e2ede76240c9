use proptest::prelude::*;
use rabsim::analysis::{antiblockade_population, population, single_atom_oracle, sweep_heatmap, HeatmapSpec};
use rabsim::dynamics::DEFAULT_DT_DIVISOR;
use rabsim::hilbert::{basis::*, hermiticity_error, max_abs, DensityMatrix, QUBIT_INDICES};
use rabsim::models::{
    derive_effective_hamiltonian, rotated_hamiltonian, rotating_frame_harmonics, rri_condition, HarmonicTerm,
};
use rabsim::units::mhz_to_angular;
use rabsim::{DriveParams, Error, GateKind, StateVector, TwoAtomOperator, C64};
use rand::{rngs::StdRng, Rng, SeedableRng};

fn reference(gate: GateKind) -> DriveParams {
    let om = mhz_to_angular(2.0);
    DriveParams::at_resonance(om, 7.5 * om, 0.0, gate).unwrap()
}

#[test]
fn harmonics_rebuild_rotated_hamiltonian() {
    let mut rng = StdRng::seed_from_u64(7);
    for gate in [GateKind::Cz, GateKind::Cnot] {
        let p = reference(gate);
        let terms = rotating_frame_harmonics(&p);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..4e-6);
            let sum = terms.iter().fold(TwoAtomOperator::zeros(), |acc, term| acc + term.at(t));
            assert!(max_abs(&(sum - rotated_hamiltonian(&p, t))) <= 1e-12 * p.omega_m);
        }
    }
}

#[test]
fn cnot_effective_hamiltonian_at_double_frequency() {
    let om = mhz_to_angular(2.0);
    let omega = 7.5 * om;
    let p = DriveParams::new(om, omega, 2.0 * omega, 0.0, GateKind::Cnot).unwrap();
    let heff = derive_effective_hamiltonian(&rotating_frame_harmonics(&p)).unwrap();
    let g = om * om / (2.0 * omega);
    let rel = |z: C64, x: f64| (z - C64::from(x)).norm() / x.abs();
    assert!(rel(heff[(S11.index(), SRR.index())], g) <= 1e-10);
    assert!(rel(heff[(S10.index(), SRR.index())], -g) <= 1e-10);
    assert!(rel(heff[(SRR.index(), SRR.index())], om * om / omega) <= 1e-10);
    for &a in &QUBIT_INDICES {
        for &b in &QUBIT_INDICES {
            assert!(heff[(a, b)].norm() <= 1e-12 * om * om / omega);
        }
    }
    assert!(hermiticity_error(&heff) <= 1e-12 * g);
}

#[test]
fn resonance_conditions() {
    assert!((rri_condition(1.0, 7.5, GateKind::Cz) - 14.911_111_111_111).abs() < 1e-10);
    assert!((rri_condition(1.0, 7.5, GateKind::Cnot) - 14.866_666_666_667).abs() < 1e-10);
}

#[test]
fn single_atom_oracle_nodes_and_gate() {
    let p = reference(GateKind::Cz);
    for k in 0..5 {
        let u = single_atom_oracle(&p, k as f64 * std::f64::consts::PI / p.omega).unwrap();
        assert!((u[(0, 0)] - C64::from(1.0)).norm() <= 1e-12);
        assert!(u[(1, 0)].norm() <= 1e-12);
    }
    assert!(matches!(single_atom_oracle(&reference(GateKind::Cnot), 1e-7), Err(Error::Precondition(_))));
}

#[test]
fn populations_of_simple_states() {
    let mut phi = StateVector::zeros();
    phi[S11.index()] = C64::from(1.0);
    assert_eq!(population(DensityMatrix::basis_state(S11).matrix(), &phi), 1.0);
    let p = population(DensityMatrix::maximally_mixed().matrix(), &phi);
    assert!((p - 1.0 / 9.0).abs() <= 1e-15);
}

#[test]
fn ridge_and_off_ridge_cells() {
    let on = reference(GateKind::Cz);
    assert!((on.v / on.omega_m - 14.9111).abs() < 1e-4);
    assert!(antiblockade_population(&on, DEFAULT_DT_DIVISOR).unwrap() >= 0.95);
    let off = on.with_v(2.0 * on.omega + 10.0 * on.omega_m).unwrap();
    assert!(antiblockade_population(&off, DEFAULT_DT_DIVISOR).unwrap() <= 0.2);
}

#[test]
fn heatmap_rejects_decay_and_bad_ranges() {
    let p = reference(GateKind::Cz);
    let spec = HeatmapSpec { v_points: 2, w_points: 2, ..HeatmapSpec::default() };
    let lossy = p.with_gamma(1e3).unwrap();
    assert!(matches!(sweep_heatmap(&lossy, &spec, DEFAULT_DT_DIVISOR), Err(Error::Precondition(_))));
    let bad = HeatmapSpec { v_range: (-1.0, 2.0), ..spec };
    assert!(matches!(sweep_heatmap(&p, &bad, DEFAULT_DT_DIVISOR), Err(Error::InvalidParameter { .. })));
}

fn op_strategy() -> impl Strategy<Value = TwoAtomOperator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 81)
        .prop_map(|v| TwoAtomOperator::from_fn(|i, j| C64::new(v[9 * i + j].0, v[9 * i + j].1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derived_hamiltonian_is_hermitian(
        ops in prop::collection::vec(op_strategy(), 1..5),
        freqs in prop::collection::vec(prop_oneof![Just(1.0f64), Just(-1.0), Just(2.5), 0.5f64..3.0], 4),
    ) {
        let terms: Vec<HarmonicTerm> = ops.into_iter().zip(freqs).map(|(h, freq)| HarmonicTerm { h, freq }).collect();
        let heff = derive_effective_hamiltonian(&terms).unwrap();
        prop_assert!(hermiticity_error(&heff) <= 1e-12 * (1.0 + max_abs(&heff)));
    }

    #[test]
    fn negative_rates_are_rejected(x in -1e9f64..-1e-12) {
        prop_assert!(DriveParams::new(1.0, 7.5, 15.0, x, GateKind::Cz).is_err());
        prop_assert!(DriveParams::new(x, 7.5, 15.0, 0.0, GateKind::Cz).is_err());
        prop_assert!(DriveParams::new(1.0, x, 15.0, 0.0, GateKind::Cz).is_err());
    }
}
