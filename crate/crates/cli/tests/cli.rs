use std::fs;
use std::process::{Command, Output};

fn aplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aplab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn closed_norm_of_the_pole() {
    let o = aplab(&["norm", "--domain", "disc", "--exp", "-1", "--p", "1", "--method", "closed"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(v["method"], "closed_form");
}

#[test]
fn methods_agree_and_mc_is_seeded() {
    let base = ["norm", "--domain", "ball(2)", "--exp", "1,2", "--p", "3"];
    let run = |extra: &[&str]| {
        let o = aplab(&[&base[..], extra].concat());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let closed = run(&["--method", "closed"])["value"].as_f64().unwrap();
    let quad = run(&["--method", "quad"])["value"].as_f64().unwrap();
    let mc = run(&["--method", "mc", "--samples", "200000", "--seed", "4"]);
    assert!((closed - quad).abs() < 1e-10 * closed);
    let (v, s) = (mc["value"].as_f64().unwrap(), mc["std_error"].as_f64().unwrap());
    assert!((v - closed).abs() < 4.0 * s);
    assert_eq!(mc, run(&["--method", "mc", "--samples", "200000", "--seed", "4", "--threads", "1"]));
}

#[test]
fn even_p_is_a_configuration_error() {
    let o = aplab(&["scenario", "run", "counterexample", "--k", "1", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim().lines().count(), 1);
}

#[test]
fn bad_flags_and_json_exit_two() {
    let o = aplab(&["norm", "--domain", "disc", "--nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim().lines().count(), 1);
    let o = aplab(&["reconstruct-map", "--scenario", "{not json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed"));
}

#[test]
fn counterexample_report_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let csv = dir.path().join("a.csv");
    let args = |out: &str, threads: &str| {
        aplab(&[
            "scenario", "run", "counterexample", "--k", "3", "--m", "2", "--seed", "0", "--samples", "200000",
            "--threads", threads, "--out", out, "--csv", csv.to_str().unwrap(),
        ])
    };
    let o = args(a.to_str().unwrap(), "1");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(args(b.to_str().unwrap(), "3").status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    let dims = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "g_automorphism_dimensions").unwrap();
    assert_eq!(dims["observed"], "12 vs ≤ 10");
    assert!(fs::read_to_string(&csv).unwrap().starts_with("name,verdict,"));

    let summary = aplab(&["report", a.to_str().unwrap()]);
    assert_eq!(summary.status.code(), Some(0));
    assert!(stdout(&summary).contains("PASS"));
}

#[test]
fn mutation_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = aplab(&[
        "scenario", "run", "counterexample", "--mutate", "weight-exponent-shift", "--samples", "100000", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = aplab(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_isometry_detects_the_dropped_weight() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    fs::write(&scenario, r#"{"kind":"counterexample","k":3,"m":2}"#).unwrap();
    let s = scenario.to_str().unwrap();
    let good = aplab(&["verify-isometry", "--scenario", s, "--samples", "100000", "--boxes", "6"]);
    assert_eq!(good.status.code(), Some(0), "{}", stdout(&good));
    let v: serde_json::Value = serde_json::from_slice(&good.stdout).unwrap();
    assert!(v["max_discrepancy"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["verdict"], "PASS");
    let bad = aplab(&["verify-isometry", "--scenario", s, "--mutate", "drop-weight", "--samples", "100000", "--boxes", "6"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn equimeasure_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let o = aplab(&[
        "equimeasure", "--scenario", r#"{"kind":"mobius","a":0.3,"p":1}"#, "--samples", "100000", "--boxes", "5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["verdict"], "PASS");
}

#[test]
fn reconstruct_map_csv_layout() {
    let o = aplab(&["reconstruct-map", "--scenario", r#"{"kind":"counterexample","k":3,"m":2}"#, "--grid", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 8 + 8 + 2);
    assert_eq!(&header[16..], &["residual", "status"]);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == header.len()));
    for r in &rows {
        let z1 = (r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap());
        let status = r[17];
        if z1 == (0.0, 0.0) {
            assert_eq!(status, "excluded_zero_weight");
        } else {
            assert_eq!(status, "mapped");
        }
    }
}

#[test]
fn kernel_csv_and_plot_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("path.csv");
    let plot = dir.path().join("probe.dat");
    fs::write(&path, "0.5,0\n0.9,0\n0.99,0\n").unwrap();
    let o = aplab(&[
        "kernel", "--domain", "disc", "--p", "2", "--degree", "12", "--path", path.to_str().unwrap(), "--gnuplot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "z,value,grad_norm,iterations");
    assert_eq!(lines.len(), 4);
    let values: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(fs::read_to_string(&plot).unwrap().lines().count(), 4);
}
