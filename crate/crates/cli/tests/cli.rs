use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bergman(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    out.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{out}"))
        .parse()
        .unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("polydisc.json"), r#"{"kind": "polydisc", "dimension": 2, "radii": [1.0, 1.0]}"#).unwrap();
    fs::write(dir.path().join("ball.json"), r#"{"kind": "ball", "dimension": 2, "radius": 1.0}"#).unwrap();
    fs::write(dir.path().join("ellipsoid.json"), r#"{"kind": "ellipsoid", "dimension": 2, "exponents": [1, 2]}"#).unwrap();
    dir
}

#[test]
fn curv_on_unit_polydisc_center() {
    let dir = workspace();
    let o = bergman(&["curv", "--domain", "polydisc.json", "--degree", "4", "--point", "0,0,0,0", "--X", "1,0,0,0"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!((value(&out, "B") + 1.0).abs() < 1e-9);
    assert!((value(&out, "H") + 1.0).abs() < 1e-9);
    assert_eq!(value(&out, "degree"), 4.0);
    assert!(out.contains("seed = 0") && out.contains("cond = "));
}

#[test]
fn minint_with_zero_direction_is_a_computational_error() {
    let dir = workspace();
    let o = bergman(&["minint", "--domain", "ball.json", "--degree", "4", "--point", "0.1,0,0,0", "--X", "0,0,0,0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate constraints"));
}

#[test]
fn missing_domain_file_is_a_usage_error() {
    let dir = workspace();
    let o = bergman(&["curv", "--domain", "missing.json", "--point", "0,0,0,0", "--X", "1,0,0,0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn malformed_arguments_are_usage_errors() {
    let dir = workspace();
    for args in [
        vec!["curv", "--domain", "ball.json", "--point", "0,0,0", "--X", "1,0,0,0"],
        vec!["curv", "--domain", "ball.json", "--point", "0,0", "--X", "1,0,0,0"],
        vec!["kernel", "--domain", "ball.json", "--point", "0,0,0,0", "--tol", "bogus=1"],
        vec!["kernel", "--domain", "ball.json", "--point", "0,0,0,0", "--quad", "simpson:3"],
        vec!["frobnicate"],
    ] {
        assert_eq!(bergman(&args, dir.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn minint_identities_on_ellipsoid() {
    let dir = workspace();
    let o = bergman(
        &["minint", "--domain", "ellipsoid.json", "--degree", "10", "--point=-0.2,0.1,0.3,-0.1", "--X", "1,0,0.5,0.5", "--Y", "0,1,1,0"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for key in ["residual_kernel", "residual_metric", "residual_holomorphic", "residual_polarized_general"] {
        assert!(value(&out, key) < 1e-8, "{key}");
    }
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = workspace();
    let run = |out: &str| {
        let o = bergman(
            &[
                "sweep", "--domain", "ball.json", "--degree", "8", "--seed", "11", "--point", "1,0,0,0", "--t-grid", "0.5,0.3,0.2",
                "--pairs", "5", "--out", out,
            ],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.path().join(out)).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,H,B_min,B_max,Ric,degree,cond,status\n"));
    assert_eq!(text.lines().count(), 4);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["degree"], 8);
}

#[test]
fn build_writes_model_and_cache_is_reused() {
    let dir = workspace();
    let args = ["build", "--domain", "ellipsoid.json", "--degree", "6", "--cache", "cache", "--out", "model.json"];
    assert_eq!(bergman(&args, dir.path()).status.code(), Some(0));
    let model = fs::read_to_string(dir.path().join("model.json")).unwrap();
    let cached: Vec<_> = fs::read_dir(dir.path().join("cache")).unwrap().collect();
    assert_eq!(cached.len(), 1);
    let entry = fs::read_to_string(cached[0].as_ref().unwrap().path()).unwrap();
    assert_eq!(entry, model);
    assert_eq!(bergman(&args, dir.path()).status.code(), Some(0));
    assert_eq!(fs::read_dir(dir.path().join("cache")).unwrap().count(), 1);
}

#[test]
fn check_weight_presets() {
    let dir = workspace();
    let ok = bergman(&["check-weight", "--weight", "diagonal-quadratic", "--radii", "0.5,1.5", "--samples", "500"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = bergman(&["check-weight", "--weight", "negative-norm", "--samples", "100"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("witness plurisubharmonic"));
    let unknown = bergman(&["check-weight", "--weight", "cubic"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn squeeze_uses_tolerance_override() {
    let dir = workspace();
    let base = ["squeeze", "--domain", "polydisc.json", "--degree", "4", "--point", "0,0,0,0", "--radii", "1,1"];
    assert_eq!(bergman(&base, dir.path()).status.code(), Some(0));
    let mut strict = base.to_vec();
    strict.extend(["--tol", "c=1.5"]);
    assert_eq!(bergman(&strict, dir.path()).status.code(), Some(1));
}
