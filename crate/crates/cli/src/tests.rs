use std::ffi::OsString;
use std::fs;
use std::path::Path;

use super::run;

fn argv(out: &Path, args: &[&str]) -> Vec<OsString> {
    let mut v: Vec<OsString> = vec!["stein-ising".into()];
    v.extend(args.iter().map(OsString::from));
    v.push("--out-dir".into());
    v.push(out.as_os_str().to_owned());
    v
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(argv(dir.path(), &["verify", "--n", "6", "--beta", "0.5", "--trials", "100", "--seed", "7"]));
    assert_eq!(code, 0);
    let records = json(&dir.path().join("verify.json"));
    let records = records.as_array().unwrap();
    assert!(!records.is_empty());
    assert!(records.iter().all(|r| r["pass"] == true));
    let manifest = json(&dir.path().join("verify.manifest.json"));
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["subcommand"], "verify");
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap().to_string();
    assert_eq!(digest, super::manifest::digest_file(&dir.path().join("verify.json")).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(argv(dir.path(), &["bogus"])), 2);
    assert_eq!(run(argv(dir.path(), &["verify", "--no-such-flag"])), 2);
    assert_eq!(run(argv(dir.path(), &["gen-graph", "--n", "5", "--d", "3"])), 2);
    assert_eq!(run(argv(dir.path(), &["spectral", "--graph", "missing.txt"])), 2);
    assert_eq!(run(argv(dir.path(), &["experiment", "no_such_study"])), 2);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "this is not a pair\n").unwrap();
    assert_eq!(run(argv(dir.path(), &["verify", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(run(argv(dir.path(), &["experiment", "delta_h_study", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.cfg");
    fs::write(&cfg, "# small run\nn = 5\ntrials = 3\n").unwrap();
    let code = run(argv(dir.path(), &["--config", cfg.to_str().unwrap(), "verify", "--n", "4"]));
    assert_eq!(code, 0);
    let manifest = json(&dir.path().join("verify.manifest.json"));
    assert_eq!(manifest["config"]["n"], 4);
    assert_eq!(manifest["config"]["trials"], 3);
}

#[test]
fn graph_round_trip_through_spectral() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(argv(dir.path(), &["gen-graph", "--n", "64", "--d", "6", "--seed", "3", "--output", "g.txt"])), 0);
    let g = dir.path().join("g.txt");
    assert_eq!(run(argv(dir.path(), &["spectral", "--graph", g.to_str().unwrap(), "--beta", "1.2"])), 0);
    let s = json(&dir.path().join("spectral.json"));
    assert!(s["deviation"].as_f64().unwrap() <= s["deviation_bound"].as_f64().unwrap() + 1e-8);
}

#[test]
fn experiment_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = a.path().join("exp.cfg");
    fs::write(&cfg, "name = high_temperature_scan\nn_list = 32, 64\nd_list = 4\nsamples = 2000\n").unwrap();
    let c = cfg.to_str().unwrap();
    let code_a = run(argv(a.path(), &["experiment", "high_temperature_scan", "--config", c]));
    let code_b = run(argv(b.path(), &["experiment", "high_temperature_scan", "--config", c]));
    assert_eq!(code_a, code_b);
    for file in ["high_temperature_scan.csv", "high_temperature_scan.verdicts.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap());
    }
    let (ma, mb) = (json(&a.path().join("high_temperature_scan.manifest.json")), json(&b.path().join("high_temperature_scan.manifest.json")));
    assert_eq!(ma["outputs"], mb["outputs"]);
}

#[test]
fn failed_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dh.cfg");
    // At n = 32 the restricted chain leaves the contraction window at once.
    fs::write(&cfg, "name = delta_h_study\nn = 8\nn_list = 32\ntrials = 50\n").unwrap();
    let code = run(argv(dir.path(), &["experiment", "delta_h_study", "--config", cfg.to_str().unwrap()]));
    assert_eq!(code, 1);
    let v = json(&dir.path().join("delta_h_study.verdicts.json"));
    assert_eq!(v["all_pass"], false);
}

#[test]
fn sample_and_couple_and_birthdeath_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(argv(dir.path(), &["sample", "--n", "16", "--samples", "500", "--sampler", "restricted", "--beta", "1.2"])), 0);
    let s = json(&dir.path().join("sample.json"));
    assert!(s["mean_magnetization"].as_f64().unwrap() >= 0.0);
    assert_eq!(run(argv(dir.path(), &["couple", "--n", "32", "--trials", "200", "--checkpoints", "32,64"])), 0);
    assert!(fs::read_to_string(dir.path().join("couple.csv")).unwrap().lines().count() == 3);
    assert_eq!(run(argv(dir.path(), &["birthdeath", "--alpha", "0.5", "--r", "6", "--m", "3", "--runs", "4000"])), 0);
}
