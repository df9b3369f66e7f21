use std::path::Path;
use std::process::{Command, Output};

fn cntqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cntqd"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn success_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"spectrum": {"b_grid": [-1, 0, 1]}}"#,
    );
    let out = dir.path().join("s.csv");
    let o = cntqd(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
    assert!(dir.path().join("s.meta.json").exists());
}

#[test]
fn validate_only_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"command": "trap"}"#);
    let out = dir.path().join("t.csv");
    let o = cntqd(&[
        "trap",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--validate-only",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: trap"));
    assert!(!out.exists());
}

#[test]
fn output_path_from_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"gate": {"b_field": 0.1, "duration": 0.01, "samples": 3}, "output": {"path": "g.csv"}}"#,
    );
    let o = cntqd(&["gate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("g.csv").exists());
}

#[test]
fn exit_codes_and_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    let cases = [
        ("bad.json", "{not json", "spectrum", 2, "ParseError"),
        (
            "unknown.json",
            r#"{"spectrum": {"b_grid": [0]}, "foo": 1}"#,
            "spectrum",
            2,
            "UnknownKey",
        ),
        (
            "invalid.json",
            r#"{"spectrum": {"b_grid": [0]}, "dot": {"delta_so": -1}}"#,
            "spectrum",
            2,
            "ValidationError",
        ),
        (
            "stuck.json",
            r#"{"trap": {"n_atoms": 4}, "relax": {"max_iterations": 1}}"#,
            "trap",
            3,
            "NumericError",
        ),
    ];
    for (name, text, cmd, code, class) in cases {
        let cfg = write(dir.path(), name, text);
        let o = cntqd(&[cmd, "--config", &cfg, "--out", out]);
        assert_eq!(o.status.code(), Some(code), "{name}: {}", stderr(&o));
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with(&format!("error[{class}]: ")), "{err}");
    }
    let err = stderr(&cntqd(&[
        "spectrum",
        "--config",
        &write(
            dir.path(),
            "v.json",
            r#"{"spectrum": {"b_grid": [0]}, "dot": {"delta_so": -1}}"#,
        ),
        "--out",
        out,
    ]));
    assert!(err.contains("dot.delta_so"), "{err}");

    let missing = cntqd(&[
        "spectrum",
        "--config",
        dir.path().join("absent.json").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(missing.status.code(), Some(4));
    assert!(stderr(&missing).starts_with("error[IoError]"));
    let cfg = write(dir.path(), "ok.json", r#"{"spectrum": {"b_grid": [0]}}"#);
    let unwritable = dir.path().join("no/such/dir/x.csv");
    let o = cntqd(&[
        "spectrum",
        "--config",
        &cfg,
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));

    let no_out = cntqd(&["spectrum", "--config", &cfg]);
    assert_eq!(no_out.status.code(), Some(2));
    assert!(stderr(&no_out).contains("output.path"));
}
