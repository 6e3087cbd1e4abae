use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn segre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segre"))
        .args(args)
        .env_remove("SEGRE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn envelope_carries_provenance() {
    let v = json(&segre(&[
        "terracini",
        "--dims",
        "2,2,2",
        "--r",
        "2",
        "--format",
        "json",
    ]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "terracini");
    assert_eq!(v["seed"], 0);
    assert_eq!(v["primes"].as_array().unwrap().len(), 2);
    assert!(v.get("elapsed_ms").is_none());
    assert_eq!(v["result"]["dimension"], 8);
    assert_eq!(v["result"]["fills"], true);

    let v = json(&segre(&[
        "terracini",
        "--dims",
        "3,3,3",
        "--r",
        "4",
        "--json",
        "--timings",
    ]));
    assert_eq!(v["result"]["dimension"], 26);
    assert_eq!(v["result"]["defect"], 1);
    assert!(v["elapsed_ms"].is_u64());
}

#[test]
fn scans_are_byte_identical_across_runs_and_threads() {
    let args = [
        "scan", "--d", "4", "--dims", "3,3,3", "--r", "3", "--format", "json", "--seed", "7",
    ];
    let a = segre(&args);
    let b = segre(&args);
    let mut threaded: Vec<&str> = args.to_vec();
    threaded.extend(["--threads", "1"]);
    let c = segre(&threaded);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"]["in_ideal"], serde_json::json!(["211|211|211"]));
    assert_eq!(v["result"]["ideal_dimension"], 27);
}

#[test]
fn csv_output_has_a_provenance_line_and_labels() {
    let out = segre(&[
        "scan", "--d", "3", "--dims", "2,2,3", "--r", "2", "--format", "csv", "--seed", "3",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(
        first.starts_with("# segre ") && first.contains(" scan seed=3 primes="),
        "{first}"
    );
    assert!(lines.next().unwrap().starts_with("label,"));
    assert!(text.contains("\n21|21|111,1,1,4,"), "{text}");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["terracini", "--dims", "0,2,2", "--r", "2"],
        vec!["terracini", "--dims", "2,2,2", "--r", "2", "--primes", "7,11"],
        vec!["scan", "--d", "3", "--dims", "2,2,2"],
        vec!["reproduce", "--case", "6.9"],
        vec!["catalog", "--name", "no-such-form"],
        vec!["chars", "--d", "40"],
        vec!["frobnicate"],
    ] {
        let out = segre(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn exhausted_budget_exits_with_three() {
    let out = segre(&["scan", "--d", "4", "--dims", "3,3,3", "--r", "3", "--budget-sec", "0"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn characters_and_decompositions() {
    let v = json(&segre(&["chars", "--d", "3", "--json"]));
    assert_eq!(v["command"], "chars");
    let v = json(&segre(&["decompose", "--d", "5", "--dims", "5,5,5", "--json"]));
    let text = v["result"].to_string();
    assert!(text.contains("311|311|221"));
    let v = json(&segre(&["cubics", "--dims", "3,3,3", "--json"]));
    assert_eq!(v["result"]["dimension"], "222");
}

#[test]
fn evaluation_distinguishes_secant_orders() {
    let at = |r: &str| {
        let v = json(&segre(&["eval", "--form", "ex-211-211-211", "--r", r, "--json"]));
        v["result"]["value"].as_u64().unwrap()
    };
    assert_eq!(at("3"), 0);
    assert_ne!(at("4"), 0);
    let v = json(&segre(&[
        "eval",
        "--form",
        "ex-211-211-211",
        "--r",
        "2",
        "--pattern",
        "2,2",
        "--json",
    ]));
    assert_eq!(v["result"]["value"], 0);
}

#[test]
fn reproduce_writes_reports_and_reports_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = segre(&["reproduce", "--case", "6.2", "--out-dir", d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("6.2.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["matches"], true);
    assert!(dir.path().join("6.2.csv").exists());

    // σ3 of 2x2x4 is a hypersurface, not all of PV
    let out = segre(&["reproduce", "--case", "6.3", "--json"]);
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let claims = v["result"]["claims"].as_array().unwrap();
    let failing: Vec<&Value> = claims.iter().filter(|c| c["matches"] == false).collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["observed"]["dimension"], 15);
}

#[test]
fn gss_certificates_and_flattening_ranks() {
    let dir = tempfile::tempdir().unwrap();
    // e1⊗e1⊗e1 + e2⊗e2⊗e2 in 2x2x2
    let rank2 = write(dir.path(), "r2.json", r#"[[[1, 0], [0, 0]], [[0, 0], [0, "1/2"]]]"#);
    let v = json(&segre(&["gss", "--tensor", &rank2, "--json"]));
    assert_eq!(v["result"]["in_sigma2"], true);
    assert_eq!(v["result"]["certificate"]["kind"], "rank_two");

    // a diagonal 3x3x3 tensor has rank 3
    let mut diag = vec![vec![vec![0; 3]; 3]; 3];
    for (i, slice) in diag.iter_mut().enumerate() {
        slice[i][i] = 1;
    }
    let rank3 = write(
        dir.path(),
        "r3.json",
        &serde_json::json!({ "tensor": diag }).to_string(),
    );
    let v = json(&segre(&["gss", "--tensor", &rank3, "--json"]));
    assert_eq!(v["result"]["in_sigma2"], false);
    assert_eq!(v["result"]["certificate"]["kind"], "witness");

    let v = json(&segre(&[
        "flatten-rank",
        "--tensor",
        &rank3,
        "--split",
        "1|2,3",
        "--json",
    ]));
    assert_eq!(v["result"]["rank"], 3);
    assert_eq!(v["result"]["shape"], serde_json::json!([3, 9]));
    let v = json(&segre(&["flatten-rank", "--tensor", &rank2, "--split", "2", "--json"]));
    assert_eq!(v["result"]["rank"], 2);

    assert_eq!(code(&segre(&["flatten-rank", "--tensor", &rank2, "--split", "1|2"])), 2);
    let bad = write(dir.path(), "bad.json", "[[1, 2], [3]]");
    assert_eq!(code(&segre(&["gss", "--tensor", &bad])), 2);
}
