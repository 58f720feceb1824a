use std::process::{Command, Output};

fn mpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpath")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn capacity_single_point() {
    let o = mpath(&["capacity", "--C", "7", "--z", "1,2,1", "--model", "additive", "--causal", "--no-feedback"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["row"]["rate"], "5");
    assert_eq!(v["row"]["regime"], "weak");
}

#[test]
fn capacity_sweep_as_csv() {
    let o = mpath(&["capacity", "--C", "2", "--sweep", "--feedback", "--secrecy", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 10);
    assert!(text.contains("causal-fb-additive-secret,causal,additive,passive,true,2,0,1,1,weak,1"));
}

#[test]
fn unequal_profile() {
    let o = mpath(&["capacity", "--profile", "3;1;1", "--z", "0,0,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["row"]["rate"], "2");
}

#[test]
fn invalid_input_exits_one() {
    assert_eq!(mpath(&["capacity", "--bogus"]).status.code(), Some(1));
    assert_eq!(mpath(&["capacity", "--C", "2", "--z", "2,1,0"]).status.code(), Some(1));
    assert_eq!(mpath(&["simulate", "--config", "/nonexistent/config.json"]).status.code(), Some(1));
    assert_eq!(mpath(&["simulate", "--scheme", "fbsec"]).status.code(), Some(1));
    assert_eq!(mpath(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_is_reproducible_from_a_config_file() {
    let dir = std::env::temp_dir().join(format!("mpath-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version":1,"scenario":"causal-nofb-additive-reliable","links":7,"z":{"rw":1,"ro":2,"wo":1},
           "scheme":"pairwise","adversary":"hash-forge","field_bits":16,"blocklength":2,"trials":50,"seed":3}"#,
    )
    .unwrap();
    let a = mpath(&["simulate", "--config", cfg.to_str().unwrap()]);
    let b = mpath(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["trials"], 50);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn leakage_targets() {
    assert_eq!(json(&mpath(&["leakage", "--target", "otp"]))["max_mi_bits"], 0.0);
    assert_eq!(json(&mpath(&["leakage", "--target", "otp-bare"]))["max_mi_bits"], 1.0);
    let o = mpath(&["leakage", "--target", "pairwise-secret", "--C", "3", "--z", "0,1,0", "--field-bits", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["report"]["max_mi_bits"], 0.0);
    assert_eq!(v["stacked_systems_invertible"], true);
}

#[test]
fn selftest_and_table_pass() {
    let o = mpath(&["selftest", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = mpath(&["verify-table"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn tampered_golden_table_exits_two() {
    let dir = std::env::temp_dir().join(format!("mpath-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("golden.csv");
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/capacity_golden.csv")).unwrap();
    std::fs::write(&path, golden.replacen(",weak,1\n", ",weak,9\n", 1)).unwrap();
    let o = mpath(&["verify-table", "--golden", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
