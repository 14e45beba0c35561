//! End-to-end runs of the installed binary: real process, real files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn cfg(name: &str, text: &str) -> PathBuf {
    let path = tmp(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclemix"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Parse a payload CSV; asserts the newline-terminated-rows contract.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n'), "rows must be newline-terminated");
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

const STRONG: &str = r#"{
  "system": {"omega_c": 8.0, "omega_d": 0.65, "delta_p": 0.16},
  "propagate": {"z_max": 26.4, "step": 0.05}
}"#;

#[test]
fn propagate_emits_the_trace_contract() {
    let config = cfg("p1.json", STRONG);
    let out_path = tmp("p1.csv");
    let out = run(&[
        "propagate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let (header, rows) = read_csv(&out_path);
    assert_eq!(
        header.join(","),
        "Z,re_omega_p,im_omega_p,re_omega_t,im_omega_t,re_omega_f,im_omega_f,\
         eta_t,eta_f,eta_total,transmission"
    );
    assert!(rows.len() > 500);
    let first = &rows[0];
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], 1e-3);
    assert_eq!(first[2], 0.0);
    assert_eq!(first[7], 0.0);
    assert_eq!(first[10], 1.0);
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0], "Z must increase");
    }
    let eta_total_max = rows.iter().map(|r| r[9]).fold(0.0, f64::max);
    assert!((eta_total_max - 0.85).abs() <= 0.08, "peak {eta_total_max}");
}

#[test]
fn payload_reruns_byte_identical_and_sidecar_describes_the_run() {
    let config = cfg("p2.json", STRONG);
    let out_path = tmp("p2.csv");
    let args = [
        "propagate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--quiet",
    ];
    assert_eq!(code(&run(&args)), 0);
    let first = fs::read(&out_path).unwrap();
    assert_eq!(code(&run(&args)), 0);
    let second = fs::read(&out_path).unwrap();
    assert_eq!(first, second, "payload must be byte-identical across reruns");

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp("p2.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(
        meta["units"],
        "rates in units of γ13, distance in units of 1/κ12"
    );
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["workflow"], "propagate");
    assert_eq!(meta["config"]["system"]["omega_c"], 8.0);
    // defaults are echoed resolved, so the echo re-runs identically
    assert_eq!(meta["config"]["system"]["gamma12"], 0.01);
    assert!(meta["summary"]["step_used"].as_f64().unwrap() > 0.0);
    assert_eq!(meta["summary"]["signatures"]["synchronized"], true);
    assert_eq!(meta["summary"]["signatures"]["interleaved"], false);
}

#[test]
fn json_payload_mirrors_the_csv() {
    let config = cfg("p3.json", STRONG);
    let csv_path = tmp("p3.csv");
    let json_path = tmp("p3.json.out");
    assert_eq!(
        code(&run(&[
            "propagate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            csv_path.to_str().unwrap(),
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "propagate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            json_path.to_str().unwrap(),
            "--format",
            "json",
        ])),
        0
    );
    let (_, csv_rows) = read_csv(&csv_path);
    let mirror: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(mirror["columns"].as_array().unwrap().len(), 11);
    let rows = mirror["rows"].as_array().unwrap();
    assert_eq!(rows.len(), csv_rows.len());
    let (i, j) = (rows.len() / 2, 9);
    assert_eq!(
        rows[i][j].as_f64().unwrap().to_bits(),
        csv_rows[i][j].to_bits(),
        "json and csv must carry the same doubles"
    );
}

#[test]
fn spectrum_resolves_the_transparency_window() {
    let weak = cfg(
        "s1.json",
        r#"{"system": {"omega_c": 0.1, "omega_d": 0.1}, "spectrum": {}}"#,
    );
    let weak_out = tmp("s1.csv");
    let out = run(&[
        "spectrum",
        "--config",
        weak.to_str().unwrap(),
        "--out",
        weak_out.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&weak_out);
    assert_eq!(header.join(","), "delta_p,alpha");
    assert_eq!(rows.len(), 1201);
    assert_eq!(rows[600][0], 0.0);
    assert!((rows[600][1] - 50.1246882793).abs() < 1e-6, "alpha(0) = {}", rows[600][1]);

    let strong = cfg(
        "s2.json",
        r#"{"system": {"omega_c": 8.0, "omega_d": 0.65, "delta_p": 0.16}, "spectrum": {}}"#,
    );
    let strong_out = tmp("s2.csv");
    assert_eq!(
        code(&run(&[
            "spectrum",
            "--config",
            strong.to_str().unwrap(),
            "--out",
            strong_out.to_str().unwrap(),
        ])),
        0
    );
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp("s2.csv.meta.json")).unwrap()).unwrap();
    let floor = meta["summary"]["window"]["floor"].as_f64().unwrap();
    assert!((floor - 0.016).abs() < 2e-3, "window floor {floor}");
    // the weak run has no window to report
    let weak_meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp("s1.csv.meta.json")).unwrap()).unwrap();
    assert!(weak_meta["summary"]["window"].is_null());
}

#[test]
fn validate_ladder_shrinks_monotonically() {
    let config = cfg("v1.json", r#"{"system": {"omega_c": 0.1}, "validate": {}}"#);
    let out_path = tmp("v1.csv");
    let out = run(&[
        "validate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&out_path);
    assert_eq!(header[0], "omega_p");
    assert_eq!(header[5], "rel_error_rho21");
    assert_eq!(header[10], "rel_error_rho31");
    assert_eq!(rows.len(), 3);
    for pair in rows.windows(2) {
        assert!(pair[1][5] < pair[0][5] / 50.0, "rho21 errors: {:?}", rows);
        assert!(pair[1][10] < pair[0][10] / 50.0, "rho31 errors: {:?}", rows);
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp("v1.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["summary"]["shrinking"], true);
}

#[test]
fn sweep_keeps_grid_order() {
    let explicit = cfg(
        "w1.json",
        r#"{"system": {"omega_d": 0.0, "delta_p": 0.16},
            "sweep": {"parameter": "omega_c", "values": [8.0, 0.1, 3.0], "z_max": 10.0}}"#,
    );
    let out_path = tmp("w1.csv");
    let out = run(&[
        "sweep",
        "--config",
        explicit.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&out_path);
    assert_eq!(header[0], "omega_c");
    let col: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(col, vec![8.0, 0.1, 3.0], "input order is the output order");

    let gridded = cfg(
        "w2.json",
        r#"{"system": {"omega_d": 0.0},
            "sweep": {"parameter": "omega_c", "start": 0.1, "stop": 8.0, "count": 5}}"#,
    );
    let out_path = tmp("w2.csv");
    assert_eq!(
        code(&run(&[
            "sweep",
            "--config",
            gridded.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ])),
        0
    );
    let (_, rows) = read_csv(&out_path);
    assert_eq!(rows.len(), 5);
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0], "grid column must ascend");
    }
}

#[test]
fn config_failures_exit_2_with_the_offending_field() {
    let unknown = cfg(
        "e1.json",
        r#"{"system": {}, "spectrum": {}, "plotting": true}"#,
    );
    let out = run(&["spectrum", "--config", unknown.to_str().unwrap(), "--out", "/dev/null"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("plotting"), "{}", stderr(&out));

    let negative = cfg("e2.json", r#"{"system": {"gamma12": -0.1}, "spectrum": {}}"#);
    let out = run(&["spectrum", "--config", negative.to_str().unwrap(), "--out", "/dev/null"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("system.gamma12"), "{}", stderr(&out));
}

#[test]
fn subcommand_must_match_the_workflow_block() {
    let config = cfg("e3.json", r#"{"system": {}, "spectrum": {}}"#);
    let out = run(&["propagate", "--config", config.to_str().unwrap(), "--out", "/dev/null"]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("propagate") && msg.contains("spectrum"), "{msg}");
}

#[test]
fn missing_plumbing_exits_2() {
    let out = run(&["propagate"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--config"), "{}", stderr(&out));

    let no_out = cfg("e4.json", r#"{"system": {}, "spectrum": {}}"#);
    let out = run(&["spectrum", "--config", no_out.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--out"), "{}", stderr(&out));
}

#[test]
fn numeric_failures_exit_3() {
    // zero dephasing on the probe transition with a live auxiliary drive:
    // the third-order denominator is singular
    let config = cfg(
        "e5.json",
        r#"{"system": {"gamma12": 0.0, "gamma23": 0.0, "gamma13": 1e-300,
                       "omega_c": 1.0, "omega_d": 0.5},
            "propagate": {}}"#,
    );
    let out = run(&["propagate", "--config", config.to_str().unwrap(), "--out", "/dev/null"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn quiet_silences_stdout() {
    let config = cfg("q1.json", STRONG);
    let out = run(&[
        "propagate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        tmp("q1.csv").to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty(), "stdout: {}", String::from_utf8_lossy(&out.stdout));
}
