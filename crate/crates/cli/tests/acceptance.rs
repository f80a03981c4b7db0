//! Runs every shipped config through the binary and prints one line per acceptance criterion.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;

struct Run {
    code: Option<i32>,
    elapsed: Duration,
    report: Value,
    bytes: Vec<u8>,
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(config: &str, tag: &str) -> Run {
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(tag).join(config);
    let _ = std::fs::remove_dir_all(&out);
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_fueter-lab"))
        .arg("run")
        .arg(root().join("configs").join(format!("{config}.toml")))
        .arg("--out")
        .arg(&out)
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let bytes = std::fs::read(out.join("report.json")).unwrap_or_default();
    let report = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    Run { code: status.status.code(), elapsed, report, bytes }
}

/// Pass state of the named checks; a missing check counts as failed.
fn checks(r: &Run, names: &[&str]) -> (bool, Vec<String>) {
    let all = r.report["checks"].as_array().cloned().unwrap_or_default();
    let mut ok = true;
    let mut notes = Vec::new();
    for n in names {
        match all.iter().find(|c| c["name"] == *n) {
            Some(c) => {
                let p = c["passed"].as_bool().unwrap_or(false);
                ok &= p;
                if !p {
                    notes.push(format!("{n} = {}", c["value"]));
                }
            }
            None => {
                ok = false;
                notes.push(format!("{n} missing"));
            }
        }
    }
    (ok, notes)
}

struct Criterion {
    id: usize,
    title: &'static str,
    config: &'static str,
    checks: &'static [&'static str],
    limit: Duration,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "energy identity",
        config: "energy-identity",
        checks: &["exact-mode max residual", "finite-difference order (min)", "finite-difference order (max)"],
        limit: Duration::from_secs(10),
    },
    Criterion {
        id: 2,
        title: "flat monotonicity",
        config: "flat-monotonicity",
        checks: &["lhs and rhs against closed form (relative)"],
        limit: Duration::from_secs(30),
    },
    Criterion {
        id: 3,
        title: "HNS blow-up locus, energy and defect tube",
        config: "hns-blowup",
        checks: &[
            "energy variation across λ",
            "largest locus distance to the circle / cell diameter",
            "circle cells covered",
            "ν mass in the tube",
        ],
        limit: Duration::from_secs(300),
    },
    Criterion {
        id: 4,
        title: "bubble extraction",
        config: "hns-blowup",
        checks: &["bubble anti-holomorphy residual (relative L²)", "bubble energy / Θ(x)", "off-locus point returns no bubble"],
        limit: Duration::from_secs(300),
    },
    Criterion {
        id: 5,
        title: "Ψ spectrum",
        config: "psi-spectrum",
        checks: &["multiplicities [1, −3]", "eigenvalue deviation", "‖(Ψ−1)(Ψ+3)‖"],
        limit: Duration::from_secs(1),
    },
    Criterion {
        id: 6,
        title: "lattice enumeration",
        config: "lattice-directions",
        checks: &[
            "enumeration differs from brute force (seeds)",
            "planted directions at A_max = 1",
            "planted directions at A_max = 1/2",
            "K3 signature",
        ],
        limit: Duration::from_secs(60),
    },
    Criterion {
        id: 7,
        title: "Heinz machinery",
        config: "heinz-machinery",
        checks: &["d = 2 root against closed form", "weak-type violations", "spike status"],
        limit: Duration::from_secs(30),
    },
    Criterion {
        id: 8,
        title: "tangent-cone diagnostics",
        config: "tangent-cone",
        checks: &["antipodal pair deficit", "planar triple deficit", "single ray |deficit − θ|", "conical map deviation (relative)"],
        limit: Duration::from_secs(30),
    },
    Criterion {
        id: 9,
        title: "twistor correspondence",
        config: "twistor-check",
        checks: &["bolt twistor residual", "radial extension residual order"],
        limit: Duration::from_secs(120),
    },
];

fn shipped_configs() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(root().join("configs"))
        .expect("configs dir")
        .filter_map(|e| e.ok())
        .filter_map(|e| e.path().file_stem().map(|s| s.to_string_lossy().into_owned()))
        .filter(|n| n != "constants")
        .collect();
    names.sort();
    names
}

fn main() -> ExitCode {
    let configs = shipped_configs();
    let first: Vec<(String, Run)> = configs.iter().map(|c| (c.clone(), run(c, "first"))).collect();
    let lookup = |name: &str| first.iter().find(|(c, _)| c == name).map(|(_, r)| r);
    let mut failed = 0;

    for c in CRITERIA {
        let (ok, notes, secs) = match lookup(c.config) {
            Some(r) => {
                // exit 1 only means some check failed, possibly one outside this criterion
                let (mut ok, mut notes) = checks(r, c.checks);
                if !matches!(r.code, Some(0 | 1)) {
                    ok = false;
                    notes.push(format!("exit code {:?}", r.code));
                }
                if r.elapsed > c.limit {
                    ok = false;
                    notes.push(format!("runtime over {:?}", c.limit));
                }
                (ok, notes, r.elapsed.as_secs_f64())
            }
            None => (false, vec![format!("config {}.toml not shipped", c.config)], 0.0),
        };
        failed += usize::from(!ok);
        let tail = if notes.is_empty() { String::new() } else { format!(" ({})", notes.join("; ")) };
        println!("{} criterion {:>2}: {} [{}, {:.1} s]{tail}", verdict(ok), c.id, c.title, c.config, secs);
    }

    let mut differing = Vec::new();
    for (c, r) in &first {
        let again = run(c, "second");
        if r.bytes.is_empty() || r.bytes != again.bytes {
            differing.push(c.clone());
        }
    }
    let ok = differing.is_empty() && !configs.is_empty();
    failed += usize::from(!ok);
    let tail = if differing.is_empty() { String::new() } else { format!(" (differs: {})", differing.join(", ")) };
    println!("{} criterion 10: determinism [{} configs run twice]{tail}", verdict(ok), configs.len());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
