use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fueter-lab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn missing_config_is_an_input_error() {
    let out = lab(&["run", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_experiment_lists_valid_names() {
    let dir = scratch("unknown");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "experiment = \"no-such-thing\"\nseed = 1\n").unwrap();
    let out = lab(&["run", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("hns-blowup") && err.contains("lattice-directions"), "{err}");
}

#[test]
fn unknown_param_is_an_input_error() {
    let dir = scratch("param");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "experiment = \"psi-spectrum\"\nseed = 1\n[params]\nbogus = 3\n").unwrap();
    let out = lab(&["run", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_flag_exits_two() {
    assert_eq!(lab(&["run"]).status.code(), Some(2));
}

#[test]
fn list_is_sorted() {
    let out = lab(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().next()).collect();
    assert!(names.contains(&"hns-blowup"));
    assert!(names.contains(&"lattice-directions"));
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

// at h = 1/4 the flat monotonicity quadrature misses the closed form by about 10%
#[test]
fn failing_threshold_exits_one() {
    let dir = scratch("fail");
    let cfg = dir.join("tight.toml");
    std::fs::write(&cfg, "experiment = \"flat-monotonicity\"\nseed = 1\n[grid]\nh = 0.25\n").unwrap();
    let out = lab(&["run", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn hns_blowup_writes_its_files() {
    let dir = scratch("hns");
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/hns-blowup.toml");
    let out = lab(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in ["report.json", "locus.csv", "bubble.csv", "metadata.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["experiment"], "hns-blowup");
}

#[test]
fn calibrate_reproduces_shipped_constants() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/constants.toml");
    let out = lab(&["calibrate", "--out", shipped.to_str().unwrap(), "--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
