use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising-echo"))
        .args(args)
        .env_remove("ISING_ECHO_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    let out = dir.path().join("scan.csv");
    fs::write(
        &cfg,
        format!(
            "n_spins = [100]\nlambda_star = [0.9, 1.0, 1.1]\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = bin(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "n_spins,lambda_star,blp,t_max,n_intervals,min_gamma,error"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("100,1.0000000000000000e0,0.0000000000000000e0,"));
    let summary: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(summary["cells"], 3);
    assert_eq!(summary["failed"], 0);
}

#[test]
fn flags_override_config_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    fs::write(&cfg, "n_spins = [100]\nlambda_star = [0.7]\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec![
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--n-spins",
            "40",
        ];
        args.extend_from_slice(extra);
        let o = bin(&args);
        assert!(o.status.success());
        stdout(&o)
    };
    let par = run(&[]);
    assert!(par.lines().nth(1).unwrap().starts_with("40,"));
    assert_eq!(par, run(&["--sequential"]));
    assert_eq!(par, run(&["--threads", "2"]));
}

#[test]
fn critical_point_detected() {
    let o = bin(&[
        "critical",
        "--n-spins",
        "100",
        "--lambda-range",
        "0.8,1.2,0.1",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["lambda_star"], 1.0);
    assert_eq!(v["markovian"], true);
}

#[test]
fn degenerate_scan_is_a_machine_readable_error() {
    let o = bin(&[
        "critical",
        "--delta",
        "0",
        "--n-spins",
        "8",
        "--lambda-star",
        "0.5,1,1.5",
    ]);
    assert!(!o.status.success());
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "ambiguous");
}

#[test]
fn series_writes_csv_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&[
        "series",
        "--n-spins",
        "8",
        "--lambda-star",
        "0.6",
        "--delta",
        "0.1",
        "--t-max",
        "10",
        "--oracle",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["oracle_max_dl"].as_f64().unwrap() < 1e-8);
    let series = fs::read_to_string(dir.path().join("series_n8_ls0.6.csv")).unwrap();
    assert_eq!(
        series.lines().next().unwrap(),
        "t,re_nu,im_nu,L,phi,gamma,lamb,fisher_flow"
    );
    assert!(dir.path().join("oracle_n8_ls0.6.csv").exists());
}

#[test]
fn oracle_subcommand_agrees() {
    let o = bin(&[
        "oracle",
        "--n-spins",
        "6",
        "--lambda-star",
        "1.1",
        "--delta",
        "0.2",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("t,L_qp,L_oracle,"));
    let s: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert!(s["max_abs_dl"].as_f64().unwrap() < 1e-8);
}

#[test]
fn invalid_inputs_exit_nonzero() {
    for args in [
        &["sweep", "--n-spins", "7", "--lambda-star", "1"][..],
        &["oracle", "--n-spins", "20"][..],
        &["series", "--n-spins", "8", "--out-dir", "/nonexistent/dir"][..],
    ] {
        let o = bin(args);
        assert!(!o.status.success(), "{args:?}");
        let err: serde_json::Value =
            serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
        assert!(err["error"].is_string());
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "lambda = 0.4\n").unwrap();
    let o = bin(&["sweep", "--config", cfg.to_str().unwrap()]);
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "invalid_config");
}
