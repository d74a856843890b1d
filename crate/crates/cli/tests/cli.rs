use std::process::{Command, Output};

fn uwb_cap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uwb-cap")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("uwbcap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn default_config_round_trips() {
    let out = uwb_cap(&["print-default-config", "coherence-sweep"]);
    assert!(out.status.success());
    let path = scratch("coherence.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let run = uwb_cap(&["coherence-sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = String::from_utf8(run.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("delta2,T_coh_s,W_coh_hz,N_coh"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[2], 5e7);
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[2] - 1e5).abs() < 1e-6);
}

#[test]
fn partial_config_overrides_defaults() {
    let path = scratch("partial.json");
    std::fs::write(&path, r#"{"experiment": "coherence-sweep", "sweep": {"points": 3}}"#).unwrap();
    let run = uwb_cap(&["coherence-sweep", "--config", path.to_str().unwrap()]);
    assert!(run.status.success());
    assert_eq!(String::from_utf8(run.stdout).unwrap().lines().count(), 4);
}

#[test]
fn bad_configs_exit_two() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"channel": {"delta1": 1.5}}"#).unwrap();
    assert_eq!(uwb_cap(&["coherence-sweep", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(uwb_cap(&["coherence-sweep", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, r#"{"experiment": "mc-validate"}"#).unwrap();
    assert_eq!(uwb_cap(&["coherence-sweep", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(uwb_cap(&["mc-validate", "--trials", "10"]).status.code(), Some(2));
    assert_eq!(uwb_cap(&["coherence-sweep", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    // At this bandwidth the large-dimension limits are far from reached.
    let path = scratch("early.json");
    std::fs::write(
        &path,
        r#"{"experiment": "estimation-sweep", "sweep": {"min": 1e4, "max": 1e5, "points": 3}}"#,
    )
    .unwrap();
    let run = uwb_cap(&["estimation-sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn scaling_regions_writes_map_alongside_csv() {
    let csv = scratch("regions.csv");
    let run = uwb_cap(&["scaling-regions", "--out", csv.to_str().unwrap()]);
    assert!(run.status.success());
    let map: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(map["oracle_mismatches"], 0);
    assert!(map["config"]["output_path"].is_null());
    assert!(std::fs::read_to_string(&csv).unwrap().contains(",TIE\n"));
}
