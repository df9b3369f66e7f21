use cntqd_cli::scenario::{
    lookup, parse_scenario, parse_scenario_with, registry, Command, Job, Param, Presence,
};
use cntqd_cli::CliError;
use cntqd_core::dotmodel::DotParameters;
use cntqd_core::gates::{PulseSpec, TwoDotGeometry};
use cntqd_core::memory::MemoryScenario;
use cntqd_core::trap::{RelaxOptions, TrapConfig};
use serde_json::Value;

fn fields<T: serde::Serialize>(v: &T) -> Vec<String> {
    match serde_json::to_value(v).unwrap() {
        Value::Object(m) => m.keys().cloned().collect(),
        _ => unreachable!(),
    }
}

#[test]
fn every_config_field_has_a_scenario_key() {
    let sections: Vec<(&str, Vec<String>)> = vec![
        ("dot", fields(&DotParameters::default())),
        ("gate", fields(&PulseSpec::field_kick(0.0, 0.0))),
        (
            "two_qubit",
            fields(&TwoDotGeometry {
                separation: 1.0,
                coupling_strength: 1.0,
            }),
        ),
        ("trap", fields(&TrapConfig::default())),
        ("relax", fields(&RelaxOptions::default())),
    ];
    for (prefix, names) in sections {
        for f in names {
            assert!(
                lookup(&format!("{prefix}.{f}")).is_some(),
                "{prefix}.{f} missing from the registry"
            );
        }
    }
    // Memory nests the chain and the dot.
    for f in fields(&MemoryScenario::default()) {
        match f.as_str() {
            "chain" => {
                assert!(lookup("memory.positions").is_some());
                assert!(lookup("memory.g_n").is_some());
            }
            "dot" => assert!(lookup("dot.delta_so")
                .unwrap()
                .commands
                .contains(&Command::Memory)),
            other => assert!(
                lookup(&format!("memory.{other}")).is_some(),
                "memory.{other}"
            ),
        }
    }
}

#[test]
fn registry_keys_are_unique_and_carry_units() {
    let mut seen = std::collections::BTreeSet::new();
    for k in registry() {
        assert!(seen.insert(k.path), "duplicate {}", k.path);
        assert!(!k.commands.is_empty());
        if let Presence::Default(Param::Float(x)) = &k.presence {
            assert!(
                k.range.contains(*x),
                "default of {} outside its range",
                k.path
            );
        }
        let numeric = matches!(
            k.presence,
            Presence::Default(Param::Float(_)) | Presence::Default(Param::List(_))
        );
        if numeric {
            assert!(!k.unit.is_empty(), "{} has no unit", k.path);
        }
    }
}

#[test]
fn minimal_spectrum_scenario_gets_defaults() {
    let s = parse_scenario(r#"{"command": "spectrum", "spectrum": {"b_grid": [0.0, 0.5, 1.0]}}"#)
        .unwrap();
    assert_eq!(s.values["dot.delta_so"], Param::Float(400.0));
    assert_eq!(s.values["dot.delta_kk"], Param::Float(65.0));
    match s.job {
        Job::Spectrum {
            dot,
            b_grid,
            gate_v,
        } => {
            assert_eq!(dot, DotParameters::default());
            assert_eq!(b_grid, vec![0.0, 0.5, 1.0]);
            assert_eq!(gate_v, 0.0);
        }
        other => panic!("{other:?}"),
    }
}

fn validation_key(text: &str) -> String {
    match parse_scenario(text) {
        Err(CliError::Validation { key, .. }) => key,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn negative_spin_orbit_names_the_key() {
    let err = parse_scenario(
        r#"{"command": "spectrum", "spectrum": {"b_grid": [0]}, "dot": {"delta_so": -1}}"#,
    )
    .unwrap_err();
    assert_eq!(err.class(), "ValidationError");
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(
        msg.contains("dot.delta_so") && msg.contains("(0, inf)"),
        "{msg}"
    );
}

#[test]
fn unknown_keys_are_rejected() {
    let err = parse_scenario(r#"{"command": "spectrum", "spectrum": {"b_grid": [0]}, "foo": 1}"#)
        .unwrap_err();
    assert!(
        matches!(&err, CliError::UnknownKey { key, .. } if key == "foo"),
        "{err}"
    );
    let err = parse_scenario(r#"{"command": "spectrum", "spectrum": {"b_grid": [0], "typo": 1}}"#)
        .unwrap_err();
    assert!(
        matches!(&err, CliError::UnknownKey { key, .. } if key == "spectrum.typo"),
        "{err}"
    );
    // Keys of other commands are not silently ignored.
    let err = parse_scenario(
        r#"{"command": "spectrum", "spectrum": {"b_grid": [0]}, "trap": {"n_atoms": 3}}"#,
    )
    .unwrap_err();
    assert!(
        matches!(&err, CliError::UnknownKey { key, .. } if key == "trap.n_atoms"),
        "{err}"
    );
}

#[test]
fn malformed_documents_are_parse_errors() {
    for text in ["{", "[1, 2]", "\"spectrum\""] {
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.class(), "ParseError", "{text}");
    }
}

#[test]
fn nested_and_dotted_keys_are_equivalent() {
    let nested = parse_scenario(
        r#"{"command": "gate", "gate": {"b_field": 0.1, "duration": 0.02}, "dot": {"g_s": 2.1}}"#,
    )
    .unwrap();
    let dotted = parse_scenario(
        r#"{"command": "gate", "gate.b_field": 0.1, "gate.duration": 0.02, "dot.g_s": 2.1}"#,
    )
    .unwrap();
    assert_eq!(nested, dotted);
    assert_eq!(nested.hash(), dotted.hash());
    let other =
        parse_scenario(r#"{"command": "gate", "gate.b_field": 0.1, "gate.duration": 0.021}"#)
            .unwrap();
    assert_ne!(nested.hash(), other.hash());
}

#[test]
fn spelled_out_defaults_hash_like_omitted_ones() {
    let a = parse_scenario(r#"{"command": "spectrum", "spectrum": {"b_grid": [0]}}"#).unwrap();
    let b = parse_scenario(r#"{"command": "spectrum", "spectrum": {"b_grid": [0], "gate_v": 0.0}, "dot": {"delta_so": 400}}"#).unwrap();
    assert_eq!(a.hash(), b.hash());
}

#[test]
fn required_and_typed_values() {
    assert_eq!(
        validation_key(r#"{"command": "spectrum"}"#),
        "spectrum.b_grid"
    );
    assert_eq!(
        validation_key(r#"{"command": "spectrum", "spectrum": {"b_grid": []}}"#),
        "spectrum.b_grid"
    );
    assert_eq!(
        validation_key(r#"{"command": "spectrum", "spectrum": {"b_grid": [1, 0]}}"#),
        "spectrum.b_grid"
    );
    assert_eq!(
        validation_key(
            r#"{"command": "spectrum", "spectrum": {"b_grid": {"start": 0, "stop": 1}}}"#
        ),
        "spectrum.b_grid"
    );
    assert_eq!(
        validation_key(r#"{"command": "spectrum", "spectrum": {"b_grid": [0], "gate_v": "x"}}"#),
        "spectrum.gate_v"
    );
    assert_eq!(
        validation_key(r#"{"command": "trap", "trap": {"n_atoms": 2.5}}"#),
        "trap.n_atoms"
    );
    assert_eq!(
        validation_key(r#"{"command": "trap", "trap": {"preset": "argon"}}"#),
        "trap.preset"
    );
    assert_eq!(
        validation_key(r#"{"command": "trap", "trap": {"tube_radius": 1.0}}"#),
        "trap.tube_radius"
    );
    assert_eq!(
        validation_key(r#"{"command": "gate", "gate": {"rabi_mode": "exact"}}"#),
        "gate.rabi_mode"
    );
    assert_eq!(
        validation_key(r#"{"command": "gate", "gate": {"b_field": 0.1}}"#),
        "gate.duration"
    );
    assert_eq!(
        validation_key(r#"{"command": "gate", "gate": {"duration": 1, "drive_amp": 3}}"#),
        "gate.drive_amp"
    );
    assert_eq!(
        validation_key(r#"{"command": "gate", "gate": {"target_phase": 1}}"#),
        "gate.target_phase"
    );
    assert_eq!(
        validation_key(r#"{"command": "gate", "dot": {"delta_kk": 500}, "gate": {"duration": 1}}"#),
        "dot.delta_kk"
    );
    assert_eq!(
        validation_key(r#"{"command": "memory", "memory": {"positions": [0.0]}}"#),
        "memory.positions"
    );
    assert_eq!(
        validation_key(r#"{"command": "memory", "memory": {"coupling_scale": -1}}"#),
        "memory.coupling_scale"
    );
    assert_eq!(
        validation_key(r#"{"command": "two-qubit", "two_qubit": {"interaction": "exchange"}}"#),
        "two_qubit.coupling_strength"
    );
    assert_eq!(
        validation_key(r#"{"command": "two-qubit", "two_qubit": {"t_grid": [2, 1]}}"#),
        "two_qubit.t_grid"
    );
}

#[test]
fn grid_objects_include_both_endpoints() {
    let s = parse_scenario(r#"{"command": "spectrum", "spectrum": {"b_grid": {"start": -2, "stop": 2, "points": 401}}}"#).unwrap();
    let Param::List(g) = &s.values["spectrum.b_grid"] else {
        panic!()
    };
    assert_eq!(g.len(), 401);
    assert_eq!((g[0], g[200], g[400]), (-2.0, 0.0, 2.0));
}

#[test]
fn command_must_agree_with_the_caller() {
    let text = r#"{"command": "trap"}"#;
    assert!(parse_scenario_with(text, Some(Command::Trap), None).is_ok());
    let err = parse_scenario_with(text, Some(Command::Gate), None).unwrap_err();
    assert!(matches!(&err, CliError::Validation { key, .. } if key == "command"));
    assert!(parse_scenario_with("{}", Some(Command::Trap), None).is_ok());
    assert!(matches!(
        parse_scenario("{}"),
        Err(CliError::Validation { .. })
    ));
}

#[test]
fn trap_overrides_layer_on_presets() {
    let s = parse_scenario(r#"{"command": "trap", "trap": {"preset": "nitrogen", "tube_radius": 4.0, "tube_length": 30}}"#).unwrap();
    let Job::Trap {
        config,
        n_atoms,
        relax,
    } = s.job
    else {
        panic!()
    };
    let base = TrapConfig::preset("nitrogen").unwrap();
    assert_eq!(
        config,
        TrapConfig {
            tube_radius: 4.0,
            tube_length: Some(30.0),
            ..base
        }
    );
    assert_eq!(n_atoms, 8);
    assert_eq!(relax, RelaxOptions::default());
}

#[test]
fn trap_parameter_files_resolve_next_to_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("params.toml"),
        "[neon]\nelement = \"Ne\"\ntube_radius = 3.4\nwall_epsilon = 2.0\nwall_sigma = 3.1\nsurface_density = 0.38\natom_epsilon = 3.0\natom_sigma = 2.8\natom_mass = 20.18\n",
    )
    .unwrap();
    let text = r#"{"command": "trap", "trap": {"params_file": "params.toml", "preset": "neon"}}"#;
    let s = parse_scenario_with(text, None, Some(dir.path())).unwrap();
    let Job::Trap { config, .. } = s.job else {
        panic!()
    };
    assert_eq!(config.element, "Ne");
    let missing = parse_scenario_with(
        r#"{"command": "trap", "trap": {"params_file": "nope.toml"}}"#,
        None,
        Some(dir.path()),
    );
    assert_eq!(missing.unwrap_err().exit_code(), 4);
}

#[test]
fn target_phase_sets_the_kick_length() {
    let s = parse_scenario(r#"{"command": "gate", "gate": {"b_field": 0.05, "target_phase": 3.141592653589793, "samples": 11}}"#).unwrap();
    let Job::PhaseGate { times, b_field, .. } = s.job else {
        panic!()
    };
    assert_eq!(times.len(), 11);
    assert_eq!(b_field, 0.05);
    assert!(times[10] > 0.0);
}
