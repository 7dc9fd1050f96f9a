use std::path::Path;
use std::process::{Command, Output};

fn laguerre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laguerre")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn metadata(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(&dir.join("metadata.json"))).unwrap()
}

#[test]
fn minimal_scalar_run_writes_one_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = laguerre(&["simulate", "--x0", "1", "--delta", "2", "--t", "0.01", "--dt", "0.001", "--seed", "7", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csvs: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    assert_eq!(csvs.len(), 1);
    let text = read(&csvs[0].path());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,lambda1"));
    assert_eq!(lines.count(), 11);
    let meta = metadata(dir.path());
    assert_eq!(meta["config"]["seed"], 7);
    assert_eq!(meta["config"]["delta"], 2.0);
    assert!(meta["version"].is_string());
}

#[test]
fn same_seed_gives_identical_bytes() {
    let run = |dir: &Path| {
        let o = laguerre(&["simulate", "--x0", "2,1", "--delta", "2.5", "--t", "0.1", "--dt", "0.001", "--paths", "3", "--seed", "11", "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path());
    run(b.path());
    for name in ["path_00000.csv", "path_00002.csv", "metadata.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    assert!(read(&a.path().join("path_00000.csv")).starts_with("t,lambda1,lambda2\n"));
    assert_ne!(read(&a.path().join("path_00000.csv")), read(&a.path().join("path_00001.csv")));
}

#[test]
fn matrix_scheme_header() {
    let o = laguerre(&["simulate", "--scheme", "matrix", "--x0", "2,1", "--delta", "2.5", "--t", "0.01", "--dt", "0.005"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,re_11,im_11,re_12,im_12,re_22,im_22"));
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[1], "2.0000000000000000e0");
}

#[test]
fn invalid_configurations_are_usage_errors() {
    for args in [
        vec!["simulate", "--x0", "1", "--delta", "-1"],
        vec!["simulate", "--x0", "2,1", "--delta", "2.5", "--nu", "0.4"],
        vec!["simulate", "--x0", "1,2,3", "--m", "2", "--delta", "2"],
        vec!["simulate", "--x0", "1", "--delta", "2", "--paths", "2"],
        vec!["law", "t0", "--x0", "2,1", "--delta", "2.5", "--grid", "1"],
        vec!["law", "t0", "--x0", "2,1", "--delta", "1.5"],
        vec!["law", "t0", "--x0", "2,1", "--delta", "1.5", "--grid", "1:2"],
        vec!["law", "nonsense"],
        vec!["verify", "--check", "nonsense"],
    ] {
        let o = laguerre(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn t0_law_on_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = laguerre(&["law", "t0", "--x0", "2,1", "--delta", "1.5", "--grid", "0.25,0.5,1,2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = read(&dir.path().join("t0.csv"));
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(text.lines().next(), Some("t,tail"));
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    assert!((rows[2][1] - 0.4509).abs() < 1e-4);
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("t0.json"))).unwrap();
    assert_eq!(meta["details"]["law"], "t0");
}

#[test]
fn hw_law_records_quadrature_stats() {
    let dir = tempfile::tempdir().unwrap();
    let o = laguerre(&["law", "hw", "--lambda", "2,1", "--grid", "1,5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("hw.csv"));
    let f: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((f[0] - 0.08799).abs() < 2e-5);
    assert!((f[1] - 0.05513).abs() < 2e-5);
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("hw.json"))).unwrap();
    let cells = meta["details"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells[0]["diagonal_cells"].as_u64().unwrap() > 0);
}

#[test]
fn numerical_failure_exit_code() {
    let o = laguerre(&["law", "hw", "--lambda", "2,1", "--grid=-1,1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn single_check_passes_and_warns_when_small() {
    let o = laguerre(&["verify", "--check", "det_moment", "--paths", "300"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("underpowered"));
    let reports: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &reports.as_array().unwrap()[0];
    for key in ["name", "estimate", "se", "reference", "z", "paths", "seed", "pass"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert_eq!(r["paths"], 300);
}

#[test]
fn thread_count_does_not_change_reports() {
    let run = |threads: &str| laguerre(&["verify", "--check", "trace_besq", "--paths", "400", "--threads", threads]).stdout;
    assert_eq!(run("1"), run("3"));
}

#[test]
fn biased_run_fails_verification() {
    let o = laguerre(&["verify", "--check", "trace_besq", "--paths", "4000", "--dt", "0.5"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn config_file_sets_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# t0 tabulation\nx0 = 2, 1\ndelta = 1.5\ngrid = 1\n").unwrap();
    let c = cfg.to_str().unwrap();
    let base = laguerre(&["law", "t0", "--config", c]);
    assert_eq!(code(&base), 0);
    let over = laguerre(&["law", "t0", "--config", c, "--grid", "2"]);
    let value = |o: &Output| String::from_utf8(o.stdout.clone()).unwrap().lines().nth(1).unwrap().to_string();
    assert!(value(&base).starts_with("1.0"));
    assert!(value(&over).starts_with("2.0"));

    std::fs::write(&cfg, "delta = 1.5\nvelocity = 3\n").unwrap();
    let bad = laguerre(&["law", "t0", "--config", c]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains(":2"));
}

#[test]
fn hypergeom_routes_agree() {
    let o = laguerre(&["hypergeom", "--a", "0.7", "--b", "3.2", "--x0", "0.5,0.2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["relative_difference"].as_f64().unwrap() < 1e-10);
}
