use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn filo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filo"))
        .args(args)
        .env_remove("FILO_FRAMEWORK_PREFIXES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn pair() -> (String, String) {
    (
        data("goodweather_baseline.jsonl").display().to_string(),
        data("goodweather_failure.jsonl").display().to_string(),
    )
}

#[test]
fn analyze_text_table() {
    let (b, f) = pair();
    let o = filo(&["analyze", "--baseline", &b, "--failure", &f, "--format", "text"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("MethodName"));
    assert!(
        lines[1].starts_with("org.asdtm.goodweather.MainActivity.gpsRequestLocation") && lines[1].ends_with("0.72")
    );
    assert!(
        lines[2].starts_with("org.asdtm.goodweather.MainActivity.onOptionsItemSelected") && lines[2].ends_with("0.69")
    );
}

#[test]
fn analyze_json_is_byte_stable() {
    let (b, f) = pair();
    let first = filo(&["analyze", "--baseline", &b, "--failure", &f]);
    let second = filo(&["analyze", "--baseline", &b, "--failure", &f]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["technique"], "filo");
    assert_eq!(
        v["ranking"][0]["method"],
        "org.asdtm.goodweather.MainActivity.gpsRequestLocation"
    );
    assert!(v["ranking"][0].get("enclosing_class").is_none());
    assert_eq!(v["ranking"][2]["enclosing_class"], "org.asdtm.goodweather.MainActivity");
    assert!(v["ranking"][0]["evidence"].as_array().unwrap().len() == 2);
}

#[test]
fn analyze_top_and_out() {
    let (b, f) = pair();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = filo(&[
        "analyze",
        "--baseline",
        &b,
        "--failure",
        &f,
        "--top",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["ranking"].as_array().unwrap().len(), 1);
}

#[test]
fn identical_inputs_exit_2() {
    let (b, _) = pair();
    let o = filo(&["analyze", "--baseline", &b, "--failure", &b]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no differences detected"));
    let o = filo(&["naive", "--baseline", &b, "--failure", &b]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_1() {
    let (b, f) = pair();
    let missing = filo(&["analyze", "--baseline", "/no/such/file.jsonl", "--failure", &f]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("/no/such/file.jsonl"));

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("bad.jsonl");
    std::fs::write(&garbage, "{\"seq\":0,\"kind\":\"b\"}\nnot json\n").unwrap();
    let malformed = filo(&["analyze", "--baseline", &b, "--failure", garbage.to_str().unwrap()]);
    assert_eq!(malformed.status.code(), Some(1));
    assert!(stderr(&malformed).contains("line 1"), "{}", stderr(&malformed));

    for bad in [
        vec!["--k1", "0.5", "--k2", "0.6"],
        vec!["--k1", "1.5"],
        vec!["--min-weight", "0"],
        vec!["--key-policy", "sometimes"],
        vec!["--framework-prefixes", ","],
    ] {
        let mut args = vec!["analyze", "--baseline", &b, "--failure", &f];
        args.extend(bad.iter());
        let o = filo(&args);
        assert_eq!(o.status.code(), Some(1), "{bad:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert_eq!(filo(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(filo(&[]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(filo(&["--help"]).status.code(), Some(0));
    assert_eq!(filo(&["--version"]).status.code(), Some(0));
    assert_eq!(filo(&["analyze", "--help"]).status.code(), Some(0));
}

#[test]
fn k1_alone_derives_k2() {
    let (b, f) = pair();
    let o = filo(&["analyze", "--baseline", &b, "--failure", &f, "--k1", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["parameters"]["k2"], 0.5);
}

#[test]
fn framework_prefixes_from_env() {
    let (b, f) = pair();
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_filo"));
        cmd.args(["analyze", "--baseline", &b, "--failure", &f]);
        match env {
            Some(v) => cmd.env("FILO_FRAMEWORK_PREFIXES", v),
            None => cmd.env_remove("FILO_FRAMEWORK_PREFIXES"),
        };
        cmd.output().unwrap()
    };
    let root = "com.android.internal.os.ZygoteInit.main";
    let default = run(None);
    assert!(!stdout(&default).contains(&format!("\"method\": \"{root}\"")));
    // Without com.android. the stack root counts as application code.
    let narrow = run(Some("android.,java."));
    assert_eq!(narrow.status.code(), Some(0), "{}", stderr(&narrow));
    assert!(stdout(&narrow).contains(&format!("\"method\": \"{root}\"")));
    // Flags win over the environment.
    let o = Command::new(env!("CARGO_BIN_EXE_filo"))
        .args([
            "analyze",
            "--baseline",
            &b,
            "--failure",
            &f,
            "--framework-prefixes",
            "android.,java.,com.android.",
        ])
        .env("FILO_FRAMEWORK_PREFIXES", "android.,java.")
        .output()
        .unwrap();
    assert_eq!(o.stdout, default.stdout);
}

#[test]
fn naive_lists_callbacks() {
    let (b, f) = pair();
    let o = filo(&["naive", "--baseline", &b, "--failure", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["technique"], "naive");
    assert_eq!(
        v["ranking"][0]["method"],
        "org.asdtm.goodweather.MainActivity$1.onLocationChanged"
    );
}

#[test]
fn sbfl_ranks_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cov.csv");
    std::fs::write(&csv, "outcome,org.a.A.x,org.a.B.y\nfail,0,1\npass,1,0\n").unwrap();
    let o = filo(&["sbfl", "--coverage", csv.to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("org.a.B.y"));

    std::fs::write(&csv, "outcome,org.a.A.x\npass,1\n").unwrap();
    assert_eq!(
        filo(&["sbfl", "--coverage", csv.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn validate_exit_codes() {
    let (_, f) = pair();
    assert_eq!(filo(&["validate", &f]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"seq\":0,\"kind\":\"e\",\"method\":\"android.a.B.c\",\"dir\":\"api\"}\n",
    )
    .unwrap();
    let o = filo(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("seq 0"), "{}", stdout(&o));

    let truncated = dir.path().join("truncated.jsonl");
    std::fs::write(
        &truncated,
        "{\"seq\":0,\"kind\":\"b\",\"method\":\"org.a.Main.onClick\",\"dir\":\"cb\",\"stack\":[\"com.android.internal.os.ZygoteInit.main\",\"org.a.Main.onClick\"]}\n",
    )
    .unwrap();
    let o = filo(&["validate", truncated.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning"));
}

#[test]
fn bench_with_manifest_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("bench.json");
    std::fs::write(
        &manifest,
        r#"{"scenarios":[
            {"id":"perm","fault_kind":"permission_early_return","app_shape":{"seed":1}},
            {"id":"cb","fault_kind":"missing_callback","app_shape":{"seed":2}}
        ]}"#,
    )
    .unwrap();
    let out = dir.path().join("artifacts");
    let o = filo(&["bench", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("Not in the ranking"));
    assert!(out.join("perm/failure.jsonl").exists());
    assert!(out.join("summary.txt").exists());

    std::fs::write(
        &manifest,
        r#"{"scenarios":[{"id":"x","fault_kind":"permission_early_return","app_shape":{"depth":0}}]}"#,
    )
    .unwrap();
    assert_eq!(filo(&["bench", manifest.to_str().unwrap()]).status.code(), Some(1));
    std::fs::write(&manifest, r#"{"scenarios":"#).unwrap();
    assert_eq!(filo(&["bench", manifest.to_str().unwrap()]).status.code(), Some(1));
}
