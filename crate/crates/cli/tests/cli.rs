use std::process::{Command, Output};

use serde_json::Value;

fn nugs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nugs"))
        .args(args)
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn log_scheme_file_has_350_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.json");
    let out = nugs(&[
        "scheme",
        "--K",
        "32",
        "--delta",
        "0.8",
        "--nu",
        "0.4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["frequencies"].as_array().unwrap().len(), 350);
    assert_eq!(v["weights"].as_array().unwrap().len(), 350);
}

#[test]
fn jittered_scheme_is_byte_identical_for_a_seed() {
    let args = [
        "scheme", "--K", "16", "--eps", "0.6", "--eta", "0.1", "--seed", "9",
    ];
    let a = nugs(&args);
    let b = nugs(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = nugs(&[
        "scheme", "--K", "16", "--eps", "0.6", "--eta", "0.1", "--seed", "10",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn reconstruct_reproduces_log_row() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = dir.path().join("s.json");
    let plot = dir.path().join("plot.csv");
    assert!(nugs(&[
        "scheme",
        "--K",
        "64",
        "--delta",
        "0.8",
        "--nu",
        "0.4",
        "--out",
        scheme.to_str().unwrap()
    ])
    .status
    .success());
    let v = json_of(&nugs(&[
        "reconstruct",
        "--scheme-file",
        scheme.to_str().unwrap(),
        "--R",
        "7",
        "--plot",
        plot.to_str().unwrap(),
    ]));
    assert!((v["ratio"].as_f64().unwrap() - 1.000912).abs() < 1e-3);
    assert!((v["projection_error"].as_f64().unwrap() - 3.046354e-2).abs() < 5e-7);
    assert_eq!(v["space"]["R"], 7);
    assert_eq!(v["method"], "cg");
    let text = std::fs::read_to_string(&plot).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,f_re,f_im,nugs_re,nugs_im,nugs_abs_err"
    );
    assert_eq!(lines.count(), 128 * 16);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# base\nK=32\ndelta=0.8\nnu=0.4\nR=6\nfamily=db\np=2\ntype=boundary\n",
    )
    .unwrap();
    let v = json_of(&nugs(&[
        "reconstruct",
        "--config",
        cfg.to_str().unwrap(),
        "--R",
        "5",
    ]));
    assert_eq!(v["space"]["R"], 5);
    assert_eq!(v["space"]["type"], "boundary");
    assert_eq!(v["samples"], 350);
}

#[test]
fn element_of_the_space_has_unit_ratio() {
    // the indicator of [0, 1] lies in every Haar space
    let v = json_of(&nugs(&[
        "reconstruct",
        "--K",
        "32",
        "--delta",
        "0.8",
        "--nu",
        "0.4",
        "--R",
        "5",
        "--signal",
        "indicator",
    ]));
    assert!(v["error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn constants_report_fields() {
    let v = json_of(&nugs(&[
        "constants",
        "--K",
        "32",
        "--delta",
        "0.8",
        "--nu",
        "0.4",
        "--R",
        "6",
        "--z",
        "8,32",
    ]));
    let c1 = v["c1"].as_f64().unwrap();
    let c3 = v["c3"].as_f64().unwrap();
    assert!(0.0 < c1 && c1 <= c3 && c3 <= 1.8f64.powi(2));
    assert!((v["kappa"].as_f64().unwrap() - (c3 / c1).sqrt()).abs() < 1e-8);
    assert!((v["haar_bound"].as_f64().unwrap() - 14.137167).abs() < 1e-6);
    assert_eq!(v["z_residuals"].as_array().unwrap().len(), 2);
}

#[test]
fn table_2_is_csv_with_provenance() {
    let out = nugs(&["table", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "space,c0,K,samples,kappa,ratio,method,seed"
    );
    assert_eq!(lines.count(), 12);
}

#[test]
fn compare_gridding_orders_errors() {
    let v = json_of(&nugs(&["compare-gridding"]));
    let grid = v["gridding_error"].as_f64().unwrap();
    let nugs = v["nugs"].as_array().unwrap();
    assert!(nugs.iter().all(|e| e[1].as_f64().unwrap() < grid));
}

#[test]
fn invalid_configuration_exits_with_2() {
    for args in [
        vec!["reconstruct", "--R", "6"],
        vec!["scheme", "--K", "32", "--delta", "1.5", "--nu", "0.4"],
        vec![
            "reconstruct",
            "--K",
            "32",
            "--delta",
            "0.8",
            "--nu",
            "0.4",
            "--R",
            "6",
            "--family",
            "db",
            "--p",
            "9",
        ],
        vec![
            "reconstruct",
            "--K",
            "32",
            "--delta",
            "0.8",
            "--nu",
            "0.4",
            "--R",
            "6",
            "--signal",
            "nope",
        ],
        vec!["table", "5"],
    ] {
        assert_eq!(nugs(&args).status.code(), Some(2), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "bandwidth=3\n").unwrap();
    assert_eq!(
        nugs(&["scheme", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn unstable_system_exits_with_3() {
    let out = nugs(&[
        "constants",
        "--K",
        "4",
        "--eps",
        "0.6",
        "--eta",
        "0.15",
        "--R",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(3));
}
