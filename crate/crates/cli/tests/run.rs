use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const R3: &str = "dim 3\nbase 1\nsegment linear 1 0 inf\n";
const CUSP: &str = "dim 2\nbase 1\nsegment linear 0.36787944117144233 0 1\nsegment exp 1 -1 1 inf\n";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(scenario: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parastokes"))
        .arg("run")
        .arg(scenario)
        .args(extra)
        .env_remove("PARASTOKES_OUT")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn capacity_scenario(dir: &Path, manifold: &str) -> PathBuf {
    write(dir, "m.manifold", manifold);
    write(
        dir,
        "cap.toml",
        r#"
manifold = "m.manifold"
command = "capacity"

[params]
p = 2.0
annuli = [[1.0, 2.0], [1.0, 4.0]]

[output]
path = "cap.csv"
format = "csv"
"#,
    )
}

#[test]
fn capacity_csv_contains_eight_pi_row() {
    let dir = TempDir::new().unwrap();
    let scn = capacity_scenario(dir.path(), R3);
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("cap.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,r1,r2,exact,surface_bound,volume_bound,tightness_volume"
    );
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(&row[..3], &[2.0, 1.0, 2.0]);
    assert!((row[3] - 8.0 * std::f64::consts::PI).abs() < 1e-9);
    assert!(row[5] >= row[3]);
}

#[test]
fn cusp_is_parabolic() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "cusp.manifold", CUSP);
    let scn = write(
        dir.path(),
        "par.toml",
        r#"
manifold = "cusp.manifold"
command = "parabolicity"
params = { p = [2.0, 3.0] }
output = { path = "par.json", format = "json" }
"#,
    );
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("par.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["kind"], "parabolicity");
    for v in json["verdicts"].as_array().unwrap() {
        assert_eq!(v["verdict"], "parabolic");
    }
}

#[test]
fn malformed_manifold_exits_two_with_segment_diagnostic() {
    let dir = TempDir::new().unwrap();
    let scn = capacity_scenario(dir.path(), "dim 3\nsegment linear 1 0 inf\nsegment wobble 2 1 inf\n");
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("m.manifold"), "{err}");
    assert!(err.contains("line 3") && err.contains("wobble"), "{err}");
    assert!(!dir.path().join("cap.csv").exists());
}

#[test]
fn missing_seed_exits_two() {
    let dir = TempDir::new().unwrap();
    let scn = write(
        dir.path(),
        "l.toml",
        r#"
command = "lindqvist"
params = { p = 3.0 }
output = { path = "l.json", format = "json" }
"#,
    );
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("params.seed"), "{}", stderr(&out));
}

#[test]
fn unknown_key_is_named() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.manifold", R3);
    let scn = write(
        dir.path(),
        "c.toml",
        r#"
manifold = "m.manifold"
command = "capacity"

[params]
annuli = [[1.0, 2.0]]
anulli = 3

[output]
path = "c.csv"
format = "csv"
"#,
    );
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("c.toml") && err.contains("anulli") && err.contains("line 7"),
        "{err}"
    );
}

#[test]
fn scenario_syntax_error_names_line() {
    let dir = TempDir::new().unwrap();
    let scn = write(dir.path(), "bad.toml", "command = \"capacity\"\nmanifold = \n");
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn violated_inequality_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let scn = write(
        dir.path(),
        "l.toml",
        r#"
command = "lindqvist"
params = { p = 3.0, n = 2, samples = 2000, seed = 5, check = 0.6 }
output = { path = "l.json", format = "json" }
"#,
    );
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("l.json")).unwrap()).unwrap();
    assert!(json["violations"].as_u64().unwrap() > 0);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.manifold", R3);
    let scn = write(
        dir.path(),
        "s.toml",
        r#"
manifold = "m.manifold"
command = "stokes"

[params]
field = "random"
seed = 9
count = 4
condition = "karp"
radii = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]

[output]
path = "s.json"
format = "json"
"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&scn, &["--out", d.to_str().unwrap()]);
        assert!(matches!(out.status.code(), Some(0 | 1)), "{}", stderr(&out));
    }
    let x = fs::read(a.join("s.json")).unwrap();
    assert_eq!(x, fs::read(b.join("s.json")).unwrap());
    assert!(!dir.path().join("s.json").exists());
}

#[test]
fn output_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let scn = capacity_scenario(dir.path(), R3);
    let target = dir.path().join("env-out");
    let out = Command::new(env!("CARGO_BIN_EXE_parastokes"))
        .args(["run", scn.to_str().unwrap()])
        .env("PARASTOKES_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(target.join("cap.csv").exists());
}

#[test]
fn tolerance_must_be_positive() {
    let dir = TempDir::new().unwrap();
    let scn = capacity_scenario(dir.path(), R3);
    let out = run(&scn, &["--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn counterexample_confirms() {
    let dir = TempDir::new().unwrap();
    let scn = write(
        dir.path(),
        "cx.toml",
        r#"
command = "sobolev-counterexample"
params = { q = 1.5, beta = 0.5, H = 4.0, r_max = 300.0, rows = 50 }
output = { path = "cx.csv", format = "csv" }
"#,
    );
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("cx.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "r,volume_ratio,lower_area_product");
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn infeasible_counterexample_is_rejected() {
    let dir = TempDir::new().unwrap();
    let scn = write(
        dir.path(),
        "cx.toml",
        r#"
command = "sobolev-counterexample"
params = { q = 1.5, beta = 0.9, H = 4.0 }
output = { path = "cx.json", format = "json" }
"#,
    );
    let out = run(&scn, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("beta"), "{}", stderr(&out));
}

#[test]
fn shipped_scenarios_run_clean() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let out = TempDir::new().unwrap();
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let res = run(&path, &["--out", out.path().to_str().unwrap()]);
            assert_eq!(res.status.code(), Some(0), "{}: {}", path.display(), stderr(&res));
            seen += 1;
        }
    }
    assert!(seen >= 8);
}
