use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_analytic-approx");

fn run(dir: &Path, config: &str, args: &[&str]) -> (i32, String) {
    let cfg = dir.join("c.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(BIN)
        .args(args)
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

const COORDINATE: &str = r#"
epsilon = 0.9
[domain]
dim = 1
radius = 2.0
shape = "box"
[target]
kind = "coordinate"
[eval]
points = 200
lipschitz_pairs = 20
spot_checks = 200
"#;

#[test]
fn constant_target_exits_zero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[target]\nkind = \"constant\"\nvalue = 5.0\n[eval]\npoints = 100\nlipschitz_pairs = 10\n";
    let (code, text) = run(d.path(), cfg, &["run"]);
    assert_eq!(code, 0, "{text}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert!(report["error"]["sup_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["passed"], true);
}

#[test]
fn capacity_exits_three() {
    let d = tempfile::tempdir().unwrap();
    let (code, text) = run(d.path(), "epsilon = 0.002\n[net]\ncap = 20000\n", &["run"]);
    assert_eq!(code, 3, "{text}");
    assert!(text.contains("cap is 20000"), "{text}");
}

#[test]
fn config_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "epsilon = -1.0\n", &["run"]).0, 2);
    assert_eq!(run(d.path(), "unknown_key = 1\n", &["run"]).0, 2);
    assert_eq!(run(d.path(), "[target]\nkind = \"no_such_target\"\n", &["run"]).0, 2);
    let (code, _) = run(d.path(), "[target]\nkind = \"coordinate\"\nindex = 7\n", &["run"]);
    assert_eq!(code, 2);
}

#[test]
fn point_tables_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path(), COORDINATE, &["run", "--seed", "9"]).0, 0);
    assert_eq!(run(b.path(), COORDINATE, &["run", "--seed", "9", "--workers", "1"]).0, 0);
    let ta = std::fs::read(a.path().join("out/points.csv")).unwrap();
    let tb = std::fs::read(b.path().join("out/points.csv")).unwrap();
    assert_eq!(ta, tb);
    let header = String::from_utf8_lossy(&ta).lines().next().unwrap().to_string();
    assert_eq!(header, "index,x0,F,K,abs_err");
}

#[test]
fn verify_gauge_suite_writes_ledger() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!("{COORDINATE}[verify]\ngauge_vectors = 500\noracle_vectors = 5\n");
    let (code, text) = run(d.path(), &cfg, &["verify", "--suite", "gauge"]);
    assert_eq!(code, 0, "{text}");
    let ledger: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("out/ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["ledger"]["suite"], "gauge");
    assert_eq!(ledger["passed"], true);
}
