use std::process::{Command, Output};

use serde_json::Value;

fn trihyper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trihyper"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

#[test]
fn teleport_verify_passes_and_reports_audit() {
    let out = trihyper(&["--no-timing", "teleport", "verify", "--inputs", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["command"], "teleport verify");
    assert_eq!(r["config"]["seed"], 1);
    assert!(r["duration_ms"].is_null());
    let fid = r["results"]["fidelity"].as_array().unwrap();
    assert_eq!(fid.len(), 16);
    for row in fid {
        assert!((row["min_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
    let rows = r["results"]["table1_audit"]["rows"].as_array().unwrap();
    let bad: Vec<&Value> = rows
        .iter()
        .filter(|x| x["internally_consistent"] == false)
        .collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0]["outcome"], "psi-phi+");
    assert!(!bad[0]["replacement_recipe"].is_null());
}

#[test]
fn teleport_verify_is_byte_stable() {
    let a = trihyper(&[
        "--no-timing",
        "teleport",
        "verify",
        "--inputs",
        "5",
        "--seed",
        "9",
    ]);
    let b = trihyper(&[
        "--no-timing",
        "teleport",
        "verify",
        "--inputs",
        "5",
        "--seed",
        "9",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_is_recorded_by_default() {
    let out = trihyper(&["qkd", "exact"]);
    assert!(json(&out)["duration_ms"].is_u64());
}

#[test]
fn teleport_run_fixed_input() {
    let out = trihyper(&[
        "--no-timing",
        "teleport",
        "run",
        "--trials",
        "20",
        "--seed",
        "4",
        "--input",
        "0.6,0,0,0.8,1,0,0,0",
        "--mode",
        "spdc",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"]["successes"], 20);
    assert_eq!(r["config"]["mode"], "spdc");
    assert_eq!(r["config"]["input"]["b"][1], 0.8);
    let counts: u64 = r["results"]["outcome_counts"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(counts, 20);
    assert_eq!(
        r["results"]["first_trace"]["bob_final"]
            .as_array()
            .unwrap()
            .len(),
        4
    );
}

#[test]
fn teleport_run_random_inputs() {
    let out = trihyper(&[
        "--no-timing",
        "teleport",
        "run",
        "--trials",
        "50",
        "--seed",
        "5",
        "--random",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["results"]["min_fidelity"].as_f64().unwrap() >= 1.0 - 1e-10);
}

#[test]
fn bad_input_is_usage_error() {
    let out = trihyper(&[
        "teleport", "run", "--trials", "1", "--seed", "1", "--input", "1,0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = trihyper(&[
        "teleport",
        "run",
        "--trials",
        "1",
        "--seed",
        "1",
        "--input",
        "0,0,0,0,1,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = trihyper(&["teleport", "run", "--trials", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qkd_exact_values() {
    let out = trihyper(&["--no-timing", "qkd", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    assert_eq!(format!("{:.10}", r["s"].as_f64().unwrap()), "2.8284271247");
    let s3 = r["s3"].as_f64().unwrap();
    assert!((s3 - 4.0 / (6.0 * 3f64.sqrt() - 9.0)).abs() < 1e-6);
    let cell = r["e_table"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["gamma"] == 67.5 && c["delta"] == 67.5)
        .unwrap();
    assert!((cell["e"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["verdict"]["secure"], true);
}

#[test]
fn qkd_exact_with_eve() {
    let r = json(&trihyper(&["--no-timing", "qkd", "exact", "--eve", "pol"]));
    assert!((r["results"]["s"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(r["results"]["verdict"]["pol_channel_secure"], false);
    let r = json(&trihyper(&["--no-timing", "qkd", "exact", "--eve", "oam"]));
    assert!(r["results"]["s3"].as_f64().unwrap() < 2.0);
    assert_eq!(r["results"]["verdict"]["oam_channel_secure"], false);
}

#[test]
fn unknown_eve_model_is_rejected() {
    let out = trihyper(&[
        "qkd", "run", "--rounds", "10", "--seed", "1", "--eve", "mitm",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mitm"));
}

#[test]
fn qkd_run_report() {
    let out = trihyper(&[
        "--no-timing",
        "qkd",
        "run",
        "--rounds",
        "50000",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["config"]["seed"], 3);
    let res = &r["results"];
    assert_eq!(res["sift"]["pol_key_errors"], 0);
    assert_eq!(res["sift"]["oam_key_errors"], 0);
    assert_eq!(res["verdict"]["secure"], true);
    assert!(!res["sift"]["pol_key_hex"].as_str().unwrap().is_empty());
    assert!(res["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a["passed"] == true));
    assert_eq!(res["efficiency"]["ekert_photons_per_bit"], 8.0);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("secure"));
}

#[test]
fn qkd_run_eve_pol_flags_channel() {
    let out = trihyper(&[
        "--no-timing",
        "qkd",
        "run",
        "--rounds",
        "200000",
        "--seed",
        "3",
        "--eve",
        "pol",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json(&out)["results"]["verdict"];
    assert_eq!(v["pol_channel_secure"], false);
    assert_eq!(v["secure"], false);
}

#[test]
fn csv_rows_match_populated_cells() {
    let args = [
        "--no-timing",
        "qkd",
        "run",
        "--rounds",
        "3000",
        "--seed",
        "8",
    ];
    let j = json(&trihyper(&args));
    fn count(v: &Value) -> usize {
        match v {
            Value::Array(a) => a.iter().map(count).sum(),
            Value::Number(n) => usize::from(n.as_u64().unwrap() > 0),
            _ => 0,
        }
    }
    let t = &j["results"]["tallies"];
    let populated = count(&t["pol"]) + count(&t["oam"]);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = trihyper(&csv_args);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), populated + 1);
    assert!(text.starts_with("channel,"));
}

#[test]
fn reports_identical_across_shards() {
    let run = |shards: &str, fmt: &str| {
        trihyper(&[
            "--no-timing",
            "qkd",
            "run",
            "--rounds",
            "40000",
            "--seed",
            "2",
            "--shards",
            shards,
            "--format",
            fmt,
        ])
        .stdout
    };
    assert_eq!(run("1", "csv"), run("5", "csv"));
    let a = serde_json::from_slice::<Value>(&run("1", "json")).unwrap();
    let b = serde_json::from_slice::<Value>(&run("3", "json")).unwrap();
    assert_eq!(a["results"], b["results"]);
    assert_eq!(run("2", "json"), run("2", "json"));
}

#[test]
fn out_path_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    let out = trihyper(&["--no-timing", "qkd", "exact", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(r["command"], "qkd exact");
}

#[test]
fn unwritable_out_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("missing").join("r.json");
    let out = trihyper(&["qkd", "exact", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
