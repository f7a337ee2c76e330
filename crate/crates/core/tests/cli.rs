use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const SUBCOMMANDS: [&str; 8] =
    ["simulate", "equilibria", "classify", "trace", "region-map", "quiver", "design-check", "phase-portrait"];

fn lamsa(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lamsa")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(config: &Path, sub: &str, out: &Path, extra: &[&str]) {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, stderr) = lamsa(&args);
    assert_eq!(code, 0, "{sub}: {stderr}");
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const TEXT_COLUMNS: [&str; 9] =
    ["mode", "class", "in_S", "in_U", "origin_flag", "valid", "label", "status", "termination"];

/// Column count matches the header and numeric columns parse.
fn check_csv_schema(path: &Path) -> usize {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        assert_eq!(record.len(), header.len(), "{}", path.display());
        for (name, field) in header.iter().zip(record.iter()) {
            if TEXT_COLUMNS.contains(&name.as_str()) {
                assert!(!field.is_empty() || name == "mode" || name == "termination");
            } else if !["file", "error"].contains(&name.as_str()) && !field.is_empty() {
                assert!(field.parse::<f64>().is_ok(), "{}: {name} = {field}", path.display());
            }
        }
        rows += 1;
    }
    rows
}

#[test]
fn every_subcommand_writes_schema_valid_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "grid = \"6x5\"\nt_end = 2.0\n");
    for sub in SUBCOMMANDS {
        let out = dir.path().join(sub);
        let extra: &[&str] = match sub {
            "equilibria" | "classify" => &["--fl-range", "-15:0:1"],
            "simulate" => &["--variant", "derived", "--fl", "-5"],
            "phase-portrait" => &["--grid", "2x2"],
            _ => &[],
        };
        run_ok(&cfg, sub, &out, extra);
        let m = manifest(&out);
        assert_eq!(m["command"], sub);
        assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
        for (name, rows) in m["files"].as_object().unwrap() {
            let path = out.join(name);
            assert!(path.exists(), "{sub}: {name}");
            if name.ends_with(".csv") {
                assert_eq!(check_csv_schema(&path) as u64, rows.as_u64().unwrap(), "{sub}: {name}");
            }
        }
    }
}

#[test]
fn equilibria_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "fl_range = \"-15:0:0.5\"\n");
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run_ok(&cfg, "equilibria", &a, &[]);
    run_ok(&cfg, "equilibria", &b, &[]);
    run_ok(&cfg, "equilibria", &c, &["--sequential"]);
    let body = std::fs::read(a.join("fixedpoints.csv")).unwrap();
    assert_eq!(body, std::fs::read(b.join("fixedpoints.csv")).unwrap());
    assert_eq!(body, std::fs::read(c.join("fixedpoints.csv")).unwrap());
    assert_eq!(manifest(&a)["files"]["fixedpoints.csv"], 31);
}

#[test]
fn seeded_portrait_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "grid = \"3x2\"\nt_end = 1.0\njitter = 0.8\nseed = 42\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(&cfg, "phase-portrait", &a, &[]);
    run_ok(&cfg, "phase-portrait", &b, &["--sequential"]);
    for name in ["index.csv", "overlay.csv", "traj_0000.csv", "traj_0005.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn trace_and_design_check_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "trace_start_p = 4.64383\nfl = -15.0\n");
    let out = dir.path().join("trace");
    run_ok(&cfg, "trace", &out, &[]);
    let text = std::fs::read_to_string(out.join("path.csv")).unwrap();
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0].parse::<f64>().unwrap(), 0.0);
    assert!(last[1].parse::<f64>().unwrap().abs() < 1e-3);
    assert_eq!(manifest(&out)["summary"]["terminal"], "reached_zero_force");

    let out = dir.path().join("design");
    run_ok(&cfg, "design-check", &out, &[]);
    assert_eq!(manifest(&out)["summary"]["feasible"], true);
}

#[test]
fn exit_status_mapping() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.toml", "");
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let g = good.to_str().unwrap();

    // validation
    let bad = write_config(dir.path(), "bad.toml", "p0 = 3.0\n");
    let (code, stderr) = lamsa(&["equilibria", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 1);
    assert!(stderr.contains("p0 must exceed"), "{stderr}");
    let typo = write_config(dir.path(), "typo.toml", "stiffnes = 2.0\n");
    assert_eq!(lamsa(&["equilibria", "--config", typo.to_str().unwrap(), "--out", out]).0, 1);
    assert_eq!(lamsa(&["equilibria", "--config", g, "--fl-range", "0:-1:1", "--out", out]).0, 1);
    assert_eq!(lamsa(&["equilibria", "--config", g, "--grid", "1x4", "--out", out]).0, 1);
    assert_eq!(lamsa(&["equilibria", "--config", g, "--variant", "other", "--out", out]).0, 1);
    assert_eq!(lamsa(&["equilibria", "--config", g, "--fl", "-1", "--fl-range", "-2:0:1"]).0, 1);
    assert_eq!(lamsa(&["frobnicate", "--config", g]).0, 1);
    assert_eq!(lamsa(&["equilibria"]).0, 1);
    assert_eq!(lamsa(&["equilibria", "--config", "/nonexistent/c.toml"]).0, 1);

    // numerical failure
    let budget = write_config(dir.path(), "budget.toml", "max_steps = 3\n");
    let (code, stderr) = lamsa(&["simulate", "--config", budget.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("step budget"));

    assert_eq!(lamsa(&["--help"]).0, 0);
    assert_eq!(lamsa(&["design-check", "--config", g, "--out", out]).0, 0);
}
