use std::process::{Command, Output};

fn coneharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coneharm"))
        .args(args)
        .env_remove("CONEHARM_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn dim_prints_exact_corank() {
    let out = coneharm(&["dim", "--a", "-1,4/3,4", "--N", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1\n");

    let out = coneharm(&[
        "dim",
        "--a",
        "-1,4/3,4",
        "--N",
        "1,2,3,4,5,6",
        "--format",
        "csv",
    ]);
    assert_eq!(stdout(&out), "N,dim\n1,0\n2,1\n3,0\n4,0\n5,1\n6,0\n");
}

#[test]
fn dim_rejects_decimals_with_validation_code() {
    let out = coneharm(&["dim", "--a", "-1,1.5,4", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1.5"));

    let out = coneharm(&["dim", "--a", "-1,1/0,4", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pell_lists_small_solutions() {
    let out = coneharm(&["pell", "--count", "4"]);
    assert!(out.status.success());
    let rows: Vec<(String, String)> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let expected = [("5", "1"), ("11", "2"), ("181", "32"), ("379", "67")];
    assert_eq!(rows.len(), 4);
    for ((p, q), (ep, eq)) in rows.iter().zip(expected) {
        assert_eq!((p.as_str(), q.as_str()), (ep, eq));
    }
}

#[test]
fn trace_writes_family_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = coneharm(&[
        "trace",
        "--eps",
        "1,1,0",
        "--m",
        "31,13",
        "--grid",
        "200",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 201);
    assert_eq!(lines[0].split(',').count(), 45);
    assert!(!csv.contains('\r'));
    let middle = |line: &str| line.split(',').nth(16).unwrap().parse::<f64>().unwrap();
    assert!(middle(lines[1]).abs() < 0.1);
    assert!(middle(lines[200]).abs() < 1e-6);

    // identical config yields identical bytes
    let again = coneharm(&["trace", "--eps", "1,1,0", "--m", "31,13", "--grid", "200"]);
    assert_eq!(stdout(&again), csv);
}

#[test]
fn solve_json_and_csv_agree() {
    let args = ["solve", "--a", "-1,1,3", "--eps", "1,1,0", "--m", "3,2"];
    let json: serde_json::Value = serde_json::from_str(&stdout(&coneharm(&args))).unwrap();
    let xi: Vec<f64> = json["solution"]["xi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(xi.len(), 5);
    assert!(json["solution"]["residual_inf"].as_f64().unwrap() <= 1e-12);

    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv = stdout(&coneharm(&csv_args));
    let from_csv: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(xi, from_csv);
}

#[test]
fn solve_in_multiple_precision() {
    let out = coneharm(&[
        "solve",
        "--a",
        "-1,1,3",
        "--eps",
        "0,1,1",
        "--m",
        "2,2",
        "--precision",
        "160",
        "--tol",
        "1e-30",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json["solution"]["residual_inf"].as_f64().unwrap() <= 1e-30);
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_coneharm"))
        .args([
            "solve", "--a", "-1,1,3", "--eps", "0,0,0", "--m", "1,1", "--tol", "1e-25",
        ])
        .env("CONEHARM_PRECISION", "128")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn bad_indices_and_cones_are_validation_errors() {
    assert_eq!(
        coneharm(&["solve", "--a", "1,-1,3", "--eps", "0,0,0", "--m", "1,1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        coneharm(&["solve", "--a", "-1,1,3", "--eps", "0,2,0", "--m", "1,1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        coneharm(&["legendre-zeros", "--ell", "3", "--m", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        coneharm(&["trace", "--eps", "1,1,0", "--m", "3,1", "--grid", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        coneharm(&["verify-all", "--only", "13"]).status.code(),
        Some(2)
    );
    assert_eq!(
        coneharm(&["harmonic", "--a", "-1,1,3", "--eps", "0,0,0", "--m", "1,0", "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
    // clap usage errors share the validation code
    assert_eq!(coneharm(&["dim", "--N", "2"]).status.code(), Some(2));
}

#[test]
fn non_convergence_is_a_computational_error() {
    let out = coneharm(&[
        "solve", "--a", "-1,1,3", "--eps", "1,1,0", "--m", "31,13", "--tol", "1e-40",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exclude_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reports.json");
    let out = coneharm(&["exclude", "--count", "4", "--out", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    assert_eq!(reports[0]["q"], 32);
    assert_eq!(reports[0]["N"], 90);
    assert!(reports.iter().all(|r| r["excluded"] == true));
}

#[test]
fn harmonic_and_legendre_outputs() {
    let out = coneharm(&["harmonic", "--a", "-1,1,3", "--eps", "0,0,0", "--m", "1,0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["N"], 2);

    let csv = stdout(&coneharm(&["legendre-zeros", "--ell", "10", "--m", "2"]));
    assert_eq!(csv.lines().count(), 1 + 4);
    let sweep = stdout(&coneharm(&[
        "wkb-sweep",
        "--ell",
        "10",
        "--m",
        "2",
        "--points",
        "7",
    ]));
    assert_eq!(sweep.lines().count(), 8);
}

#[test]
fn verify_all_subset_reports_table() {
    let out = coneharm(&["verify-all", "--only", "2,9"]);
    assert!(out.status.success());
    let table = stdout(&out);
    assert!(table.contains("PASS"));
    assert!(table.ends_with("2/2 criteria passed\n"));
}
