use std::path::Path;
use std::process::{Command, Output};

fn cstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cstar")).args(args).env_remove("CSTAR_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn tower_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z2.json");
    let o = cstar(&["tower", "z2", "--depth", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&out);
    assert_eq!(v["seed"], 0xC57A);
    assert_eq!(v["model"], "z2");
    assert!(v.get("timing_ms").is_none());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("model"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"family\": ").unwrap();
    assert_eq!(code(&cstar(&["tower", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&cstar(&["tower", "z2", "--depth", "9"])), 2);
    assert_eq!(code(&cstar(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&cstar(&["tower", "no_such_model"])), 2);
    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, r#"{"family": "full_matrix", "params": {"k": 3, "n": 4}}"#).unwrap();
    let o = cstar(&["tower", wrong.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn verify_angles_reports_right_angle() {
    let dir = tempfile::tempdir().unwrap();
    let o = cstar(&["verify", "--suite", "angles", "--models", "s3_quadruple", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&dir.path().join("s3_quadruple_angles.json"));
    let checks = v["checks"].as_array().unwrap();
    let alpha = checks.iter().find(|c| c["name"].as_str().unwrap().starts_with("alpha")).unwrap();
    assert!((alpha["value"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn spec_file_takes_label_from_stem() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("my_pair.json");
    std::fs::write(&f, r#"{"family": "diagonal", "params": {"n": 2}}"#).unwrap();
    let o = cstar(&["verify", "--suite", "expect", "--models", f.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("my_pair_expect.json").exists());
}

#[test]
fn z4_lattice_dot() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.dot");
    let b = dir.path().join("b.dot");
    for p in [&a, &b] {
        let o = cstar(&["lattice", "z4", "--dot", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.matches(" [label=").count(), 15);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn trivial_inclusion_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("same.json");
    std::fs::write(&f, r#"{"family": "full_matrix", "params": {"k": 2, "n": 2}}"#).unwrap();
    let dot = dir.path().join("same.dot");
    let o = cstar(&["lattice", f.to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(std::fs::read_to_string(&dot).unwrap().matches(" [label=").count(), 1);
}

#[test]
fn node_cap_warns_without_failing() {
    let o = cstar(&["lattice", "z4", "--cap", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("warning"));
}

#[test]
fn seed_from_environment_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env.json");
    let o = Command::new(env!("CARGO_BIN_EXE_cstar"))
        .args(["tower", "z2", "--depth", "1", "--out", out.to_str().unwrap()])
        .env("CSTAR_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(json(&out)["seed"], 99);
    let o = cstar(&["tower", "z2", "--depth", "1", "--seed", "0x10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&out)["seed"], 16);
}

#[test]
fn timing_and_tolerance_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = cstar(&["tower", "c_m2", "--depth", "1", "--timing", "--tol", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&out);
    assert!(v["timing_ms"].is_u64());
    let base = cstar(&["tower", "c_m2", "--depth", "1", "--out", dir.path().join("b.json").to_str().unwrap()]);
    assert_eq!(code(&base), 0);
    let b = json(&dir.path().join("b.json"));
    let t0 = b["checks"][0]["tolerance"].as_f64().unwrap();
    let t1 = v["checks"][0]["tolerance"].as_f64().unwrap();
    if t0 > 0.0 {
        assert!((t1 - 2.0 * t0).abs() <= 1e-12 * t1);
    }
}
