use std::process::{Command, Output};

fn qbackflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbackflow")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = stdout(o);
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
#[allow(clippy::approx_constant)]
fn thresholds() {
    let o = qbackflow(&["threshold", "--mode", "path", "--p", "1"]);
    assert!(o.status.success());
    assert!((num(stdout(&o).trim()) - 0.7071067811865).abs() < 1e-12);
    let o = qbackflow(&["threshold", "--mode", "switch", "--p", "1"]);
    assert!((num(stdout(&o).trim()) - 0.6324555320337).abs() < 1e-12);
    let o = qbackflow(&["threshold", "--mode", "path", "--p", "0"]);
    assert_eq!(stdout(&o).trim(), "0");
    let o = qbackflow(&["threshold", "--mode", "path", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evolve_bare_series() {
    let o = qbackflow(&["evolve", "--mode", "bare", "--a", "0.65", "--t-max", "5"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&o);
    assert_eq!(
        header.join(","),
        "t,rho00_re,rho00_im,rho01_re,rho01_im,rho10_re,rho10_im,rho11_re,rho11_im,probability"
    );
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[100][0], "5");
    assert!((num(&rows[0][1]) - 0.65 * 0.65).abs() < 1e-14);
    for r in &rows {
        assert!((num(&r[1]) + num(&r[7]) - 1.0).abs() < 1e-12);
        assert_eq!(r[9], "1");
    }
}

#[test]
fn evolve_path_at_zero_echoes_input() {
    let o = qbackflow(&["evolve", "--mode", "path", "--p", "1", "--t", "0"]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&o);
    assert_eq!(rows, vec![["0", "1", "0", "0", "0", "0", "0", "0", "0", "0.5"].map(String::from).to_vec()]);
}

#[test]
fn evolve_switch_long_time() {
    let o = qbackflow(&["evolve", "--mode", "switch", "--p", "1", "--input", "1,0,0,0", "--t", "10"]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&o);
    assert!((num(&rows[0][1]) - 3.0 / 7.0).abs() < 1e-6);
    assert!((num(&rows[0][7]) - 4.0 / 7.0).abs() < 1e-6);
}

#[test]
fn evolve_complex_input_and_json() {
    let o =
        qbackflow(&["evolve", "--mode", "bare", "--input", "0.5,0,0,-0.5,0,0.5,0.5,0", "--t", "1", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "evolve");
    let rho = &v["rows"][0]["rho"];
    assert!(rho[1][1].as_f64().unwrap() < 0.0);
    assert_eq!(v["rows"][0]["probability"], 1.0);
}

#[test]
fn evolve_usage_errors() {
    assert_eq!(qbackflow(&["evolve", "--mode", "bare"]).status.code(), Some(2));
    assert_eq!(qbackflow(&["evolve", "--mode", "bare", "--t", "1", "--input", "1,0,0"]).status.code(), Some(2));
    assert_eq!(qbackflow(&["evolve", "--mode", "bare", "--t", "1", "--input", "1,0,0,1"]).status.code(), Some(2));
    assert_eq!(qbackflow(&["evolve", "--mode", "path", "--p", "1.5", "--t", "1"]).status.code(), Some(2));
    assert_eq!(qbackflow(&["evolve", "--mode", "warp", "--t", "1"]).status.code(), Some(2));
    assert_eq!(qbackflow(&["evolve", "--mode", "bare", "--t", "-1"]).status.code(), Some(2));
}

#[test]
fn postselection_impossible_has_its_own_exit_code() {
    let o = qbackflow(&["evolve", "--mode", "switch", "--p", "1", "--outcome", "minus", "--t", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("post-selection"));
}

#[test]
fn detect_verdicts_in_exit_status() {
    let o = qbackflow(&["detect", "--mode", "path", "--p", "1", "--a", "0.65"]);
    assert_eq!(o.status.code(), Some(5));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("backflow=true"), "{err}");
    let (header, rows) = csv_rows(&o);
    assert_eq!(header.join(","), "t,distance,ddt,ddt_fd,backflow");
    assert_eq!(rows.len(), 2000);
    assert!(rows.iter().any(|r| r[4] == "1" && num(&r[0]) > 1.0));

    let o = qbackflow(&["detect", "--mode", "switch", "--p", "1", "--a", "0.65"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("backflow=false"));
    let o = qbackflow(&["detect", "--mode", "bare", "--a", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn detect_json_has_documented_keys() {
    let o = qbackflow(&["detect", "--mode", "path", "--p", "1", "--a", "0.65", "--points", "200", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in
        ["times", "distance", "derivative", "derivative_fd", "backflow_intervals", "verdict", "persists", "marginal"]
    {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], true);
    assert_eq!(v["times"].as_array().unwrap().len(), 200);
}

#[test]
fn distance_series() {
    let o = qbackflow(&[
        "distance",
        "--mode",
        "switch",
        "--a",
        "0.5",
        "--p",
        "0.5",
        "--t-min",
        "0.1",
        "--t-max",
        "2",
        "--points",
        "20",
        "--spacing",
        "linear",
    ]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&o);
    assert_eq!(header, vec!["t", "distance"]);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&num(&r[1]))));
}

#[test]
fn scan_grid_and_containment() {
    let o = qbackflow(&[
        "scan",
        "--a-min",
        "0.02",
        "--a-max",
        "1",
        "--a-steps",
        "50",
        "--p-min",
        "0.02",
        "--p-max",
        "1",
        "--p-steps",
        "50",
        "--points",
        "400",
    ]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&o);
    assert_eq!(header.join(","), "a,p,path,switch");
    assert_eq!(rows.len(), 2500);
    // p-major, then a.
    assert_eq!((rows[0][0].as_str(), rows[0][1].as_str()), ("0.02", "0.02"));
    assert_eq!((rows[1][0].as_str(), rows[1][1].as_str()), ("0.04", "0.02"));
    assert!(rows.iter().all(|r| r[3] == "false" || r[2] == "true"));
}

#[test]
fn scan_single_cells() {
    for (a, expected) in [("0.65", ("true", "false")), ("0.9", ("false", "false"))] {
        let o = qbackflow(&[
            "scan",
            "--a-min",
            a,
            "--a-max",
            a,
            "--a-steps",
            "1",
            "--p-min",
            "1",
            "--p-max",
            "1",
            "--p-steps",
            "1",
        ]);
        let (_, rows) = csv_rows(&o);
        assert_eq!((rows[0][2].as_str(), rows[0][3].as_str()), expected);
    }
}

#[test]
fn oversize_scan_is_a_usage_error() {
    let o = qbackflow(&["scan", "--a-steps", "1001", "--p-steps", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_byte_stable_and_can_go_to_a_file() {
    let args = ["detect", "--mode", "switch", "--p", "0.5", "--a", "0.4", "--points", "100"];
    let a = qbackflow(&args);
    let b = qbackflow(&args);
    assert_eq!(a.stdout, b.stdout);

    let dir = std::env::temp_dir().join(format!("qbackflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.csv");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let c = qbackflow(&with_out);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    std::fs::remove_dir_all(&dir).unwrap();

    let bad = qbackflow(&["threshold", "--mode", "path", "--p", "1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn thread_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qbackflow"))
        .args(["scan", "--a-steps", "3", "--p-steps", "3", "--points", "50"])
        .env("QBACKFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_qbackflow"))
        .args(["threshold", "--mode", "path", "--p", "1"])
        .env("QBACKFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_suites() {
    let o = qbackflow(&["validate", "--suite", "ode", "--t", "5"]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], "true");
    assert!(num(&rows[0][3]) < 1e-6);

    let o = qbackflow(&["validate", "--suite", "cptp", "--inject-perturbation", "1e-6"]);
    assert_eq!(o.status.code(), Some(4));
    let (_, rows) = csv_rows(&o);
    assert!(rows.iter().any(|r| r[1] == "phi_t completeness" && r[2] == "false"));

    for suite in ["cptp", "reductions", "derivatives"] {
        assert!(qbackflow(&["validate", "--suite", suite]).status.success(), "{suite}");
    }
}

#[test]
fn help_exits_zero() {
    assert!(qbackflow(&["--help"]).status.success());
    assert_eq!(qbackflow(&[]).status.code(), Some(2));
}
