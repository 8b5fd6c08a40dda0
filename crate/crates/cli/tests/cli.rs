use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn swapavn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swapavn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn bounds_reports_two_and_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = swapavn(&["bounds", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let b = read_json(&dir.path().join("bounds.json"));
    assert_eq!(b["quantum"], 4.0);
    assert_eq!(b["lhv"], 2.0);
    assert_eq!(b["lhv_constrained"]["max_value"], 2);
    assert_eq!(b["lhv_unconstrained"]["max_value"], 4);
    assert!((b["cirelson"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn noise_scan_reports_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = swapavn(&[
        "noise-scan",
        "--out",
        &out_arg(dir.path()),
        "--visibility-grid",
        "0,0.5,1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let n = read_json(&dir.path().join("noise.json"));
    assert!((n["threshold"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(n["scan"].as_array().unwrap().len(), 3);
    let table = fs::read_to_string(dir.path().join("noise.csv")).unwrap();
    assert_eq!(
        table.lines().next(),
        Some("visibility,expectation_m,affine_error")
    );
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn avn_reports_no_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let o = swapavn(&["avn", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let a = read_json(&dir.path().join("avn.json"));
    for b in a["certificate"]["branches"].as_array().unwrap() {
        assert_eq!(b["sat_count"], 0);
    }
    assert_eq!(a["perfect_correlations_sat_count"], 16);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    for args in [
        vec!["bounds", "--no-such-flag"],
        vec!["frobnicate"],
        vec!["optics-verify", "--pbs-phase", "2", "--out", &out],
        vec!["sample", "--eta23", "1.5", "--out", &out],
        vec!["sample", "--shots", "0", "--out", &out],
        vec!["noise-scan", "--visibility-grid", "0,2", "--out", &out],
        vec!["sample", "--format", "xml", "--out", &out],
    ] {
        assert_eq!(swapavn(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_layout_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("bad.txt");
    fs::write(&layout, "element QWP90 in2\n").unwrap();
    let o = swapavn(&[
        "optics-verify",
        "--layout",
        layout.to_str().unwrap(),
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn failing_layout_writes_failure_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("pbs_only.txt");
    fs::write(&layout, "element PBS in2 in3\n").unwrap();
    let out = dir.path().join("run");
    let o = swapavn(&[
        "optics-verify",
        "--layout",
        layout.to_str().unwrap(),
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let f = read_json(&out.join("failure.json"));
    assert_eq!(f["first_failure"], "eps=-1 never gives a coincidence");
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["pass"], false);
    assert_eq!(m["first_failure"], f["first_failure"]);
}

#[test]
fn custom_layout_file_passes() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("selector.txt");
    fs::write(
        &layout,
        "# selector\nelement QWP45 in2\nelement HWP in3\nelement QWP45 in3\nelement PBS in2 in3\nelement QWP45 out_c\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = swapavn(&[
        "optics-verify",
        "--layout",
        layout.to_str().unwrap(),
        "--pbs-phase",
        "-i",
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = read_json(&out.join("optics_verify.json"));
    assert_eq!(r["convention"], "-i");
    assert!(!out.join("failure.json").exists());
}

#[test]
fn sample_writes_trials_in_either_format() {
    let dir = tempfile::tempdir().unwrap();
    let csv_dir = dir.path().join("csv");
    let o = swapavn(&[
        "sample",
        "--shots",
        "300",
        "--eta23",
        "0.5",
        "--out",
        &out_arg(&csv_dir),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(csv_dir.join("trials.csv")).unwrap();
    assert_eq!(
        table.lines().next(),
        Some("trial,setting1,setting23,setting4,o1,o23_first,o23_second,o4,click1,click23,click4")
    );
    assert_eq!(table.lines().count(), 301);
    let s = read_json(&csv_dir.join("sample.json"));
    assert_eq!(s["config"]["eta23"], 0.5);
    assert_eq!(s["config"]["seed"], 42);
    assert!(s["trials_used"].as_u64().unwrap() < 300);

    let json_dir = dir.path().join("json");
    let o = swapavn(&[
        "sample",
        "--shots",
        "300",
        "--format",
        "json",
        "--out",
        &out_arg(&json_dir),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let trials = read_json(&json_dir.join("trials.json"));
    assert_eq!(trials.as_array().unwrap().len(), 300);
}

#[test]
fn seed_controls_the_trials() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = swapavn(&[
            "sample",
            "--shots",
            "500",
            "--seed",
            seed,
            "--out",
            &out_arg(&out),
        ]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(out.join("trials.csv")).unwrap()
    };
    assert_eq!(run("a", "7"), run("b", "7"));
    assert_ne!(run("a", "7"), run("c", "8"));
}

#[test]
fn search_restricted_to_one_phase() {
    let dir = tempfile::tempdir().unwrap();
    let o = swapavn(&[
        "optics-search",
        "--pbs-phase",
        "+1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = read_json(&dir.path().join("optics_search.json"));
    let conventions = s["conventions"].as_array().unwrap();
    assert_eq!(conventions.len(), 1);
    assert_eq!(conventions[0]["convention"], "+1");
    assert!(s["total_passing"].as_u64().unwrap() > 0);
}
