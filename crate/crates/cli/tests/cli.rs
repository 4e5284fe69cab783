use std::process::{Command, Output};

fn s3sr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_s3sr"))
        .args(args)
        .env_remove("S3SR_DEFAULT_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn row(line: &str) -> Vec<f64> {
    line.split(',').map(|f| f.parse().unwrap()).collect()
}

#[test]
fn quarter_great_circle_ends_on_x3() {
    let o = s3sr(&["sample", "--B", "0", "--theta", "0", "--s-end", "1.5708", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = row(text.lines().last().unwrap());
    let want = [0.0, 0.0, 1.0, 0.0];
    for k in 0..4 {
        assert!((last[k + 1] - want[k]).abs() < 1e-4, "{last:?}");
    }
    assert_eq!(text.lines().count(), 102);
}

#[test]
#[allow(clippy::approx_constant)]
fn fiber_report_json() {
    let o = s3sr(&["connect", "--fiber-omega", "1.5708", "--n-max", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sols = v["solutions"].as_array().unwrap();
    assert_eq!(v["count"].as_u64().unwrap() as usize, sols.len());
    assert!(!sols.is_empty());
    for s in sols {
        assert!(s["residual"].as_f64().unwrap() <= 1e-9);
        let n = s["branch_index"].as_f64().unwrap();
        let (b, len) = (s["B"].as_f64().unwrap(), s["s_arc"].as_f64().unwrap());
        // k s = π n on the whole family.
        assert!((len * b.hypot(1.0) - std::f64::consts::PI * n).abs() < 1e-12);
    }
    let want = (4.0 * std::f64::consts::PI.powi(2) - 1.5708f64.powi(2)).sqrt();
    assert!(sols
        .iter()
        .any(|s| s["branch_index"] == 2 && (s["s_arc"].as_f64().unwrap() - want).abs() < 1e-12));
}

#[test]
fn zero_length_integration_is_one_row() {
    let o = s3sr(&["integrate", "--xi", "0,0,1,0", "--s-end", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let r = row(lines[1]);
    assert_eq!(&r[..5], &[0.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(r[12], 0.5);
}

#[test]
fn csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("run{i}.csv"))).collect();
    for p in &paths {
        let o = s3sr(&[
            "integrate",
            "--xi",
            "0.3,-0.8,0.6,0.8",
            "--s-end",
            "5",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(a.len() > 1000);
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
}

#[test]
fn exit_codes() {
    // Usage errors.
    assert_eq!(s3sr(&["sample"]).status.code(), Some(1));
    assert_eq!(s3sr(&["sample", "--s-end", "-1"]).status.code(), Some(1));
    assert_eq!(s3sr(&["integrate", "--xi", "1,2,3", "--s-end", "1"]).status.code(), Some(1));
    assert_eq!(s3sr(&["sample", "--s-end", "1", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(s3sr(&["connect", "--target", "2,0,0,0"]).status.code(), Some(1));
    let o = s3sr(&["connect", "--target", "1,0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("VerticalLineCase"));
    assert_eq!(s3sr(&["--help"]).status.code(), Some(0));

    // Numerical failure: the chart integrator refuses to start on a singular fiber.
    let o = s3sr(&["integrate", "--chart", "hyper", "--hyper-state", "0,0,0,0.3,0.2,0.1", "--s-end", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ChartSingularity"));

    // Verification failure.
    let o = s3sr(&["verify", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_reads_env() {
    let o = s3sr(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    let o = Command::new(env!("CARGO_BIN_EXE_s3sr"))
        .args(["verify"])
        .env("S3SR_DEFAULT_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn connect_with_oracle_and_lhs_grid() {
    let target = "0.6,0.3,0.5,0.5477225575051661";
    let o = s3sr(&["connect", "--target", target, "--s-max", "6.283185307179586", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["oracle_count"], v["count"]);

    let o = s3sr(&["connect", "--target", target, "--emit-lhs-grid", "50", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("B,lhs"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn hopf_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let loop_csv = dir.path().join("loop.csv");
    let o = s3sr(&["hopf", "shortest", "--omega", "1", "--loop-output", loop_csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["holonomy_error"].as_f64().unwrap() < 1e-8);
    let s1 = (1.0f64 * (2.0 * std::f64::consts::PI - 1.0)).sqrt();
    assert!((v["s_arc"].as_f64().unwrap() - s1).abs() < 1e-12);

    let o = s3sr(&["hopf", "holonomy", "--loop", loop_csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let h: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // Chord interpolation between the file samples costs a little enclosed area.
    assert!((h["angle"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(h["lift_residual"].as_f64().unwrap() < 1e-10);

    let path_csv = dir.path().join("path.csv");
    let o = s3sr(&[
        "sample", "--B", "0.7", "--theta", "0.3", "--s-end", "2", "--samples", "20", "--output",
        path_csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = s3sr(&["hopf", "project", "--input", path_csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("t,u1,u2,u3"));
    let first = row(text.lines().nth(1).unwrap());
    assert_eq!(&first[1..], &[1.0, 0.0, 0.0]);

    let o = s3sr(&["hopf", "holonomy", "--loop", path_csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
