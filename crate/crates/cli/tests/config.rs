use proptest::prelude::*;
use rabsim::GateKind;
use rabsim_cli::config::{parse_config, parse_config_file, RawConfig, Scenario};
use rabsim_cli::output::format_sig;
use rabsim_cli::CliError;

fn flags(pairs: &[(&str, &str)]) -> RawConfig {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn defaults_are_the_reference_operating_point() {
    let cfg = parse_config(Scenario::GateFidelity, None, &RawConfig::new()).unwrap();
    assert_eq!(cfg.gate, GateKind::Cz);
    assert_eq!((cfg.omega_m_mhz, cfg.omega_ratio, cfg.gamma_khz), (2.0, 7.5, 1.5));
    assert_eq!(cfg.v_over_om, None);
    assert!((cfg.resolved_v_over_om() - 14.911_111_111_111).abs() < 1e-10);
    let p = cfg.params().unwrap();
    assert!((p.omega_m - 2.0 * std::f64::consts::PI * 2e6).abs() < 1e-6);
    assert!((p.gamma - 2.0 * std::f64::consts::PI * 1.5e3).abs() < 1e-9);
}

#[test]
fn cnot_resolves_its_own_resonance() {
    let cfg = parse_config(Scenario::GateFidelity, None, &flags(&[("omega_ratio", "7.5"), ("gate", "cnot")])).unwrap();
    assert!((cfg.resolved_v_over_om() - 14.866_666_666_667).abs() < 1e-10);
}

#[test]
fn flags_override_file_override_defaults() {
    let file =
        parse_config_file("# reference run\ngamma_khz = 0.5\nomega_ratio = 8 # trailing\n\ngate=cnot\n").unwrap();
    let cfg = parse_config(Scenario::GateFidelity, Some(&file), &flags(&[("gamma_khz", "1.0")])).unwrap();
    assert_eq!(cfg.gamma_khz, 1.0);
    assert_eq!(cfg.omega_ratio, 8.0);
    assert_eq!(cfg.gate, GateKind::Cnot);
    assert_eq!(cfg.omega_m_mhz, 2.0);
}

#[test]
fn every_offending_field_is_reported() {
    let err = parse_config(
        Scenario::GateFidelity,
        None,
        &flags(&[("grid_n", "2"), ("gamma_khz", "-1"), ("omega_m_mhz", "x"), ("dt_divisor", "10")]),
    )
    .unwrap_err();
    let CliError::Validation(msgs) = &err else { panic!("{err:?}") };
    for key in ["grid_n", "gamma_khz", "omega_m_mhz", "dt_divisor"] {
        assert!(msgs.iter().any(|m| m.starts_with(key)), "{key} missing from {msgs:?}");
    }
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn zero_drive_is_rejected() {
    let err =
        parse_config(Scenario::GateFidelity, None, &flags(&[("omega_m_mhz", "0"), ("gamma_khz", "0")])).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn heatmap_requires_coherent_dynamics() {
    assert_eq!(parse_config(Scenario::Heatmap, None, &RawConfig::new()).unwrap().gamma_khz, 0.0);
    assert!(parse_config(Scenario::Heatmap, None, &flags(&[("gamma_khz", "1")])).is_err());
    assert!(parse_config(Scenario::Heatmap, None, &flags(&[("v_min", "12"), ("v_max", "11")])).is_err());
}

#[test]
fn malformed_file_lines() {
    let err = parse_config_file("gate = cz\nnot a pair\ncolour = red\n").unwrap_err();
    let CliError::Validation(msgs) = err else { panic!() };
    assert_eq!(msgs.len(), 2);
}

#[test]
fn scenario_names_round_trip() {
    for s in [Scenario::RabPopulations, Scenario::Heatmap, Scenario::GateFidelity, Scenario::FidelityVsGamma] {
        assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
    }
    assert!("fig2b".parse::<Scenario>().is_err());
}

proptest! {
    #[test]
    fn twelve_significant_digits(x in prop_oneof![-1e15f64..1e15, -1e-3f64..1e-3]) {
        let back: f64 = format_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-12 * x.abs());
    }
}
