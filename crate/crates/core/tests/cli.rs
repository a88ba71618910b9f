use std::process::Command;

fn holocat() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holocat"))
}

const LOOP: &str = r#"
version = 1
[gate]
kind = "loop"
area = 0.785398163397448
[path]
T = 100.0
[jump]
d = 2
alpha = 2.0
[integrator]
samples = 5
"#;

#[test]
fn rank_prints_su3_dimension() {
    let out = holocat().args(["rank", "--d", "3", "--alpha", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "8");
}

#[test]
fn missing_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("absent.toml");
    let out = holocat()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .arg("simulate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.toml"));
}

#[test]
fn bad_config_field_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, LOOP.replace("d = 2", "d = 2\ndee = 3")).unwrap();
    let out = holocat().arg("--config").arg(&cfg).arg("gate-check").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("dee") && err.contains("line"), "{err}");
}

#[test]
fn loop_gate_check_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("loop.toml");
    std::fs::write(&cfg, LOOP).unwrap();
    let out = holocat()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .arg("gate-check")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert_eq!(out.status.code(), Some(0), "{text}");
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value("phase") - std::f64::consts::FRAC_PI_2).abs() < 0.05);
    assert!(value("fidelity") >= 0.99);

    let out = holocat()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .arg("simulate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary: toml::Value = toml::from_str(&std::fs::read_to_string(dir.path().join("summary.toml")).unwrap()).unwrap();
    assert!(summary["n_trunc"].as_integer().unwrap() >= 29);
    assert!(summary["steps"].as_integer().unwrap() > 0);
    assert!(summary.get("max_trace_drift").is_some());
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn wigner_writes_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let out = holocat()
        .arg("--out")
        .arg(dir.path())
        .args(["wigner", "--d", "2", "--alpha", "1.5", "--points", "21"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let pgm = std::fs::read(dir.path().join("wigner.pgm")).unwrap();
    assert!(pgm.starts_with(b"P"));
}

#[test]
fn gap_and_connections_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = holocat()
        .arg("--out")
        .arg(dir.path())
        .args(["gap", "--separations", "0,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("gap.csv").exists());
    let out = holocat()
        .arg("--out")
        .arg(dir.path())
        .args(["connections", "--param", "modulus", "--from", "0.5", "--to", "2", "--points", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("connections.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}
