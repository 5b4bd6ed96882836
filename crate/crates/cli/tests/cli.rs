use std::path::Path;
use std::process::{Command, Output};

fn polysing(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polysing"))
        .current_dir(dir)
        .env_remove("POLYSING_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn reference_construct_verifies_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = polysing(tmp.path(), &["construct", "--theorem", "1.5", "--m", "3", "--n", "7", "--lambda", "3", "--phi", "pow:1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spec = read_json(&tmp.path().join("out/spec.json"));
    assert_eq!(spec["bumps"].as_array().unwrap().len(), 8);

    let csv = std::fs::read_to_string(tmp.path().join("out/sequence.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# polysing construct config_digest="));
    assert_eq!(lines.next().unwrap(), "position,j,x_norm,radius,log_radius,epsilon,mass,log_mass");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 17 significant digits: d.dddddddddddddddde±x
    assert_eq!(first[2].split('e').next().unwrap().len(), 18);
    assert_eq!(csv.lines().count(), 10);

    let v1 = polysing(tmp.path(), &["verify", "--spec", "out/spec.json", "--output", "a.json"]);
    assert!(v1.status.success(), "{}", String::from_utf8_lossy(&v1.stdout));
    let v2 = polysing(tmp.path(), &["verify", "--spec", "out/spec.json", "--output", "b.json"]);
    assert!(v2.status.success());
    let (a, b) = (read_json(&tmp.path().join("a.json")), read_json(&tmp.path().join("b.json")));
    assert_eq!(a, b);
    assert_eq!(a["overall"], true);
    assert_eq!(a["provenance"]["seed"], 7);
}

#[test]
fn tampered_spec_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(polysing(tmp.path(), &["construct"]).status.success());
    let path = tmp.path().join("out/spec.json");
    let mut spec = read_json(&path);
    let lm = spec["bumps"][3]["log_mass"].as_f64().unwrap();
    spec["bumps"][3]["log_mass"] = (lm + 100f64.ln()).into();
    std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    let out = polysing(tmp.path(), &["verify", "--spec", "out/spec.json"]);
    assert_eq!(out.status.code(), Some(1));
    let certs = read_json(&tmp.path().join("out/certificates.json"));
    let failed: Vec<String> = certs["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| c["checks"].as_array().unwrap().clone())
        .filter(|c| c["mandatory"] == true && c["verdict"] != "pass")
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failed, ["pointwise-inequality"]);
}

#[test]
fn inadmissible_lambda_names_the_window() {
    let tmp = tempfile::tempdir().unwrap();
    let out = polysing(tmp.path(), &["construct", "--theorem", "1.5", "--lambda", "8"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("(11/5, 7)"), "{err}");
    assert!(!tmp.path().join("out/spec.json").exists());
}

#[test]
fn bad_input_exits_with_usage_status() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(polysing(tmp.path(), &["construct", "--bogus"]).status.code(), Some(2));
    assert_eq!(polysing(tmp.path(), &["construct", "--theorem", "1.9"]).status.code(), Some(2));
    assert_eq!(polysing(tmp.path(), &["construct", "--phi", "cosh"]).status.code(), Some(2));
    assert_eq!(polysing(tmp.path(), &["verify", "--spec", "missing.json"]).status.code(), Some(4));
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.toml"), "j_max = 4\nout_dir = \"from-config\"\n\n[verify]\nseed = 11\n").unwrap();
    let out = polysing(tmp.path(), &["--config", "run.toml", "construct", "--j-max", "6", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spec = read_json(&tmp.path().join("from-config/spec.json"));
    assert_eq!(spec["bumps"].as_array().unwrap().len(), 4);
    let note = spec["meta"]["notes"].as_array().unwrap().last().unwrap().as_str().unwrap().to_string();
    assert!(note.ends_with("seed=11"), "{note}");

    std::fs::write(tmp.path().join("bad.toml"), "jmax = 4\n").unwrap();
    assert_eq!(polysing(tmp.path(), &["--config", "bad.toml", "construct"]).status.code(), Some(2));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polysing"))
        .current_dir(tmp.path())
        .env("POLYSING_OUT", "envdir")
        .args(["kelvin-check", "--m", "3", "--n", "7"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("envdir/kelvin_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 19);
    assert!(csv.contains("3,7,3,-576,-10,-576*|y|^-10,true"));
}

#[test]
fn kernel_table_is_all_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = polysing(tmp.path(), &["kernel-table", "--mmax", "5", "--nmax", "12"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().skip(2).collect();
    assert_eq!(rows.len(), 55);
    assert!(rows.iter().all(|r| r.ends_with(",true,true")));
}

#[test]
fn exterior_spec_passes_the_growth_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = polysing(tmp.path(), &["construct", "--theorem", "1.17", "--lambda", "2", "--output", "ext.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = polysing(tmp.path(), &["kelvin-check", "--spec", "ext.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    // an interior construction is rejected
    assert!(polysing(tmp.path(), &["construct", "--output", "int.json"]).status.success());
    assert_eq!(polysing(tmp.path(), &["kelvin-check", "--spec", "int.json"]).status.code(), Some(2));
}
