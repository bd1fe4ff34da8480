mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use ibsat::cnf::read_dimacs;
use ibsat::estimator::{success_probability, BackdoorSet};
use serde_json::Value;

fn ibsat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibsat")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn cipher_arg(name: &str) -> String {
    cipher_path(name).display().to_string()
}

fn json_lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn encode_writes_annotated_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let o = ibsat(dir.path(), &["encode", "--cipher", &cipher_arg("geffe_3_4_5")]);
    assert_eq!(o.status.code(), Some(0));
    let f = read_dimacs(&stdout(&o)).unwrap();
    let (_, _, want) = load_cipher("geffe_3_4_5");
    assert_eq!(f, want);

    let net = manifest_dir().join("netlists/adder4.net");
    let o = ibsat(dir.path(), &["encode", "--netlist", net.to_str().unwrap(), "--out", "a.cnf"]);
    assert_eq!(o.status.code(), Some(0));
    let f = read_dimacs(&std::fs::read_to_string(dir.path().join("a.cnf")).unwrap()).unwrap();
    assert_eq!((f.roles().inputs.len(), f.roles().outputs.len()), (8, 5));
}

#[test]
fn estimate_reports_and_appends_records() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["estimate", "--cipher", &cipher_arg("geffe_3_4_5"), "--chi", "ones", "--budget-conflicts", "5"];
    let o = ibsat(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("xi_bar   1 (1000/1000"), "{}", stdout(&o));
    // 2^12 * 5 * 3
    assert!(stdout(&o).contains("G        6.144000e4 conflicts"), "{}", stdout(&o));

    let with_out: Vec<&str> = args.iter().copied().chain(["--out", "est.jsonl", "--no-calibrate"]).collect();
    for _ in 0..2 {
        assert_eq!(ibsat(dir.path(), &with_out).status.code(), Some(0));
    }
    let lines = json_lines(&dir.path().join("est.jsonl"));
    assert_eq!(lines.len(), 2);
    assert_eq!(without_timing(lines[0].clone()), without_timing(lines[1].clone()));
    assert_eq!(lines[0]["xi_bar"], 1.0);
    assert_eq!(lines[0]["g_value"], 61440.0);
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("est.jsonl.config.json")).unwrap()).unwrap();
    assert_eq!(sidecar["samples"], 1000);

    let o = ibsat(dir.path(), &["estimate", "--cipher", &cipher_arg("geffe_7_8_9"), "--chi", "zeros", "--budget-seconds", "1e-12"]);
    assert!(stdout(&o).contains("G        inf"), "{}", stdout(&o));
}

#[test]
fn supbs_check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let o = ibsat(dir.path(), &["supbs-check", "--cipher", &cipher_arg("geffe_3_4_5"), "--chi", "ones", "--seed", seed]);
        let s = stdout(&o);
        assert!(s.contains("mode     exhaustive, 4096 guesses checked") && s.contains("supbs    true"), "{s}");
    }
    let o = ibsat(dir.path(), &["supbs-check", "--cipher", &cipher_arg("geffe_7_8_9"), "--chi", "zeros"]);
    assert!(stdout(&o).contains("supbs    false"));
    let o = ibsat(dir.path(), &["supbs-check", "--cipher", &cipher_arg("trivium_10_11"), "--chi", "ones"]);
    assert!(stdout(&o).contains("sampled (1024 guesses"), "{}", stdout(&o));
}

fn minimize(dir: &Path, journal: &str, extra: &[&str]) -> Output {
    let cipher = cipher_arg("geffe_3_4_5");
    let mut args = vec![
        "minimize",
        "--cipher",
        &cipher,
        "--budget-conflicts",
        "2",
        "--samples",
        "200",
        "--seed",
        "4",
        "--no-calibrate",
        "--journal",
        journal,
    ];
    args.extend_from_slice(extra);
    ibsat(dir, &args)
}

fn stripped_journal(path: &Path) -> Vec<Value> {
    json_lines(path).into_iter().map(without_timing).collect()
}

#[test]
fn minimize_is_deterministic_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let a = minimize(dir.path(), "a.jsonl", &["--max-evaluations", "30", "--out", "a.json"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = minimize(dir.path(), "b.jsonl", &["--max-evaluations", "30", "--workers", "3"]);
    assert_eq!(b.status.code(), Some(0));
    minimize(dir.path(), "c.jsonl", &["--max-evaluations", "11"]);
    let c = minimize(dir.path(), "c.jsonl", &["--max-evaluations", "30", "--resume"]);
    assert_eq!(c.status.code(), Some(0));

    let ja = stripped_journal(&dir.path().join("a.jsonl"));
    assert_eq!(ja.len(), 30);
    assert_eq!(ja, stripped_journal(&dir.path().join("b.jsonl")));
    assert_eq!(ja, stripped_journal(&dir.path().join("c.jsonl")));

    let result: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(result["evaluations"], 30);
    assert_eq!(result["termination"], "evaluation_limit");
    assert_eq!(result["g_start"], 4096.0 * 2.0 * 3.0);
    assert!(result["g_best"].as_f64().unwrap() <= result["g_start"].as_f64().unwrap());
    assert_eq!(result["config_sha256"], ja[0]["config_sha256"]);
    assert_eq!(result["config"]["seeds"]["search"], 4);
    assert!(dir.path().join("a.jsonl.config.json").exists());

    // a journal from another configuration is refused
    let d = ibsat(
        dir.path(),
        &["minimize", "--cipher", &cipher_arg("geffe_3_4_5"), "--budget-conflicts", "3", "--journal", "a.jsonl", "--resume"],
    );
    assert_eq!(d.status.code(), Some(2));
}

#[test]
fn initial_chi_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let o = minimize(dir.path(), "j.jsonl", &["--max-evaluations", "3", "--initial-chi", "idx:0,5,11"]);
    assert_eq!(o.status.code(), Some(0));
    let j = json_lines(&dir.path().join("j.jsonl"));
    assert_eq!(j[0]["chi"], BackdoorSet::from_indices(12, &[0, 5, 11]).to_hex());
    assert_eq!(j[0]["s"], 3);
}

#[test]
fn attack_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let spn = cipher_arg("toy_spn_8");
    let o = ibsat(dir.path(), &["attack", "--cipher", &spn, "--chi", "ones", "--r", "1", "--out", "ok.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ok.json")).unwrap()).unwrap();
    assert_eq!(report["success"], true);
    let pred = &report["prediction"];
    let (p, r) = (pred["p_hat"].as_f64().unwrap(), pred["r"].as_u64().unwrap());
    assert_eq!((p, r), (1.0, 1));
    assert_eq!(pred["predicted_success"].as_f64().unwrap(), success_probability(p, r));
    assert_eq!(report["p_hat_source"], "estimated");
    assert!(report["config"].is_object());

    // r derived from P_hat at the 0.95 target
    let o = ibsat(dir.path(), &["attack", "--cipher", &spn, "--chi", "idx:0,1", "--p-hat", "0.2", "--out", "d.json"]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(report["r"], 14, "{}", stdout(&o));

    let o = ibsat(dir.path(), &["attack", "--cipher", &spn, "--chi", "zeros", "--r", "4", "--budget-seconds", "1e-12"]);
    assert_eq!(o.status.code(), Some(3));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("attack_report.json")).unwrap()).unwrap();
    assert_eq!((report["success"].clone(), report["failures"].clone()), (Value::Bool(false), Value::from(4)));

    let o = ibsat(dir.path(), &["attack", "--cipher", &spn, "--chi", "ones", "--guess-cap-bits", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ibsat(dir.path(), &["estimate", "--chi", "ones"]).status.code(), Some(2));
    assert_eq!(ibsat(dir.path(), &["estimate", "--cipher", &cipher_arg("geffe_3_4_5"), "--chi", "0101"]).status.code(), Some(2));
    assert_eq!(ibsat(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let o = ibsat(dir.path(), &["estimate", "--cipher", "missing.toml", "--chi", "ones"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.toml"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(cipher_path("geffe_3_4_5"), dir.path().join("g.toml")).unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "cipher = \"g.toml\"\nsamples = 50\nbudget = { mode = \"conflicts\", limit = 7 }\n[seeds]\nsample = 3\n",
    )
    .unwrap();
    let o = ibsat(dir.path(), &["--config", "run.toml", "estimate", "--chi", "ones"]);
    assert!(stdout(&o).contains("(50/50 solved within 7 conflicts)"), "{}", stdout(&o));
    let o = ibsat(dir.path(), &["--config", "run.toml", "estimate", "--chi", "ones", "--samples", "20"]);
    assert!(stdout(&o).contains("(20/20"), "{}", stdout(&o));
    std::fs::write(dir.path().join("bad.toml"), "cipher = \"g.toml\"\nsamplez = 5\n").unwrap();
    assert_eq!(ibsat(dir.path(), &["--config", "bad.toml", "estimate", "--chi", "ones"]).status.code(), Some(2));
}
