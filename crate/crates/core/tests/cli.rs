use std::fs;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kerr-rings"))
        .arg("run")
        .args(args)
        .arg("--out")
        .arg(out)
        .env("KERR_RINGS_THREADS", "2")
        .output()
        .unwrap()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn fig2_names_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["--scenario", "fig2", "--points", "64", "--stages", "s1,s3p,s3r"];
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    let names: Vec<String> = tree(&a).into_iter().map(|(n, _)| n).collect();
    for v in ["0", "0p5", "1", "2", "4"] {
        assert!(names.contains(&format!("fig2_theta1_{v}.csv")), "{names:?}");
    }
    assert_eq!(tree(&a), tree(&b));
    let text = fs::read_to_string(a.join("fig2_theta1_1.csv")).unwrap();
    assert!(text.starts_with("x,s1,s3_printed,s3_reduced\n"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn json_output_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["--scenario", "fig3", "--points", "32", "--format", "json", "--report", "--stages", "s3p,s3r"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("fig3_theta4_1p5.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["grid"].as_array().unwrap().len(), 32);
    assert!(tmp.path().join("fig3_theta4_0_report.json").exists());
}

#[test]
fn config_file_run_with_oracle_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("collinear.json");
    fs::write(
        &cfg,
        r#"{"lambda3_nm": 633, "lambda4_nm": 633, "theta1_deg": 0, "theta3_deg": 0, "theta4_deg": 0,
            "L_mm": 2, "w3_mm": 1, "w4_mm": 1, "closure": "solve_signal_pair"}"#,
    )
    .unwrap();
    let out = run(
        &["--config", cfg.to_str().unwrap(), "--points", "32", "--oracle-checks"],
        &tmp.path().join("out"),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("out/collinear.csv").exists());
    let checks = fs::read_to_string(tmp.path().join("out/custom_oracle_checks.json")).unwrap();
    assert!(checks.contains("\"passed\": true"));
}

#[test]
fn validation_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--scenario", "figX"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["--scenario", "fig2", "--points", "4"], tmp.path()).status.code(), Some(2));
    let bad = tmp.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"lambda3_nm": 633, "lambda4_nm": 633, "theta1_deg": 0, "theta3_deg": 0, "theta4_deg": 0,
            "L_mm": -2, "w3_mm": 1, "w4_mm": 1, "closure": "solve_signal_pair"}"#,
    )
    .unwrap();
    let out = run(&["--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("must be positive"));
}
