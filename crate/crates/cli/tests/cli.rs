use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(args)
        .env_remove("HARDY_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(table: &str, key: &str) -> f64 {
    table
        .lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no {key} in {table}"))
}

fn read_profile(path: &Path) -> Vec<[f64; 4]> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,u,du_dr,residual"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn exponents_table() {
    let o = hardy(&["exponents", "--dim", "3", "--mu", "2"]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert_eq!(field(&t, "tau_plus"), 1.0);
    assert_eq!(field(&t, "tau_minus"), -2.0);
    assert!((field(&t, "p_star") - 4.0 / 3.0).abs() < 1e-15);
    assert!(t.contains("dual_solvable       true"));

    let t = stdout(&hardy(&["exponents", "--dim", "3", "--mu", "0"]));
    assert_eq!(field(&t, "p_star"), 1.5);
    assert!((field(&t, "c_mu") - 4.0 * std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn exponents_below_threshold() {
    let o = hardy(&["exponents", "--dim", "3", "--mu", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mu below Hardy threshold -0.25"));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn solve_manufactured_dual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.toml");
    fs::write(&cfg, "dim = 3\nmu = 2.0\nf = [10.0]\ncells = 256\n").unwrap();
    let out = dir.path().join("out");
    let o = hardy(&["solve", "dual", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_profile(&out.join("solve-dual.csv"));
    assert_eq!(rows.len(), 257);
    let err = rows.iter().map(|r| (r[1] - (1.0 - r[0] * r[0])).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("solve-dual.json")).unwrap()).unwrap();
    assert_eq!(side["profile"], "solve-dual.csv");
    assert!(side["residual_linf"].as_f64().unwrap() < 1e-10);
    assert!((side["norms"]["sup"].as_f64().unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn solve_dirac_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.toml");
    fs::write(&cfg, "dim = 3\nmu = 2.0\ncells = 1024\ngrading = 3.0\n").unwrap();
    let o = hardy(&["solve", "dirac", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_profile(&dir.path().join("solve-dirac.csv"));
    let mut checked = 0;
    for r in rows.iter().filter(|r| r[0] >= 0.05 && r[0] <= 0.95) {
        let exact = r[0].powi(-2) - r[0];
        assert!((r[1] - exact).abs() <= 1e-3 * exact.abs(), "{:?}", r);
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn solve_flag_overrides_and_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("e.toml");
    fs::write(&empty, "").unwrap();
    let d = dir.path().to_str().unwrap();
    let o = hardy(&["solve", "dual", "--config", empty.to_str().unwrap(), "--out", d]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "dim = 3\nmu = 2.0\nf = [1.0]\n").unwrap();
    let c = cfg.to_str().unwrap();
    // μ below the dual threshold is a usage error.
    let o = hardy(&["solve", "dual", "--config", c, "--mu", "-0.2", "--out", d]);
    assert_eq!(o.status.code(), Some(2));
    let o = hardy(&["solve", "dual-regularized", "--config", c, "--out", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon"));
    let o = hardy(&["solve", "direct", "--config", c, "--cells", "64", "--out", d]);
    assert!(o.status.success());
    assert_eq!(read_profile(&dir.path().join("solve-direct.csv")).len(), 65);
    assert_eq!(hardy(&["solve", "dual", "--config", "/nonexistent.toml"]).status.code(), Some(2));
}

#[test]
fn verify_single_suite_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = hardy(&[
        "verify",
        "fundamental-identity",
        "--dim",
        "4",
        "--mu",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["pass"], true);
    assert_eq!(m["config"]["dim"], 4);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["suites"][0]["name"], "fundamental-identity");
    let file = m["suites"][0]["files"][0].as_str().unwrap();
    assert!(!Path::new(file).is_absolute());
    let csv = fs::read_to_string(out.join(file)).unwrap();
    assert!(csv.starts_with("label,xi_at_origin,"));
    assert!(m["wall_ms"].is_u64());
}

#[test]
fn verify_errors_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = hardy(&["verify", "marcinkiewicz", "--mu", "-0.1", "--out", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mu > 0"));
    let o = hardy(&["verify", "no-such-suite", "--out", d]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("strict.toml");
    fs::write(&cfg, "identity_tol = 1e-30\n").unwrap();
    let o = hardy(&["verify", "fundamental-identity", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL fundamental-identity"));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["pass"], false);

    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = hardy(&["verify", "all", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown_key"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(["verify", "fundamental-identity"])
        .env("HARDY_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("manifest.json").exists());
}
