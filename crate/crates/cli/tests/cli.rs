use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asep-sixvertex")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut all = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--out", p]);
    let out = cli(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(&path).unwrap()
}

const CONVERGE: &[&str] = &["--command", "converge", "--epsilons", "0.2,0.1", "--replicas", "300", "--seed", "9"];

#[test]
fn converge_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(dir.path(), "a.csv", &[CONVERGE, &["--threads", "1"]].concat());
    let b = run_to(dir.path(), "b.csv", &[CONVERGE, &["--threads", "1"]].concat());
    let c = run_to(dir.path(), "c.csv", &[CONVERGE, &["--threads", "8"]].concat());
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# "), "config header first");
    assert!(text.contains("# deltas: [[0.06,0.2],[0.03,0.1]]"), "{text}");
    assert!(text.contains("epsilon,statistic,value,radius,samples"));
    assert_eq!(text.lines().filter(|l| l.starts_with("0.2,ks:tag=-1:t=1,")).count(), 1);
    assert_eq!(text.lines().filter(|l| l.starts_with("0.1,ks:tag=-1:t=1,")).count(), 1);
}

#[test]
fn every_command_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 5] = [
        &["--command", "sample-ensemble", "--delta1", "0.3", "--delta2", "0.5", "--size", "12", "--replicas", "3"],
        &["--command", "sim-asep", "--M", "10", "--N", "10", "--times", "0.5,1", "--replicas", "20", "--phi", "bernoulli:0.5,0.5"],
        &["--command", "sim-offset", "--epsilons", "0.1", "--times", "1", "--replicas", "20", "--engine", "graph"],
        &["--command", "bound-check", "--M", "8,16", "--N", "8,16", "--times", "5", "--replicas", "30", "--phi", "bernoulli:0.5,0.5"],
        &["--command", "bad-events", "--epsilons", "0.05", "--M", "3", "--N", "3", "--replicas", "50"],
    ];
    for (i, args) in commands.iter().enumerate() {
        let one = run_to(dir.path(), &format!("{i}-1.csv"), &[args, &["--threads", "1"][..]].concat());
        let eight = run_to(dir.path(), &format!("{i}-8.csv"), &[args, &["--threads", "8"][..]].concat());
        assert_eq!(one, eight, "command {args:?}");
        assert!(!one.is_empty());
    }
}

#[test]
fn sim_asep_columns_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(run_to(
        dir.path(),
        "asep.csv",
        &["--command", "sim-asep", "--M", "6", "--N", "6", "--times", "1", "--L", "0.4"],
    ))
    .unwrap();
    assert!(text.contains("# L: 0.4\n"));
    assert!(text.contains("replica_id,time,tag,position,color\n"));
    // Step data on [-6, 6] fills sites -6..=0.
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("0,1,")).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.ends_with(",blue")));
}

#[test]
fn json_output_carries_config_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = run_to(
        dir.path(),
        "o.json",
        &["--command", "sim-offset", "--delta1", "0.2", "--delta2", "0.4", "--times", "3", "--format", "json"],
    );
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["config"]["delta2"], 0.4);
    let rows = v["rows"].as_array().unwrap();
    // Step data: three blue particles after three steps.
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["t"] == 3 && r["color"] == "blue"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "sim-asep", "M": [5], "N": [5], "L": 0.2, "R": 0.9, "times": [0.5]}"#).unwrap();
    let text =
        String::from_utf8(run_to(dir.path(), "x.csv", &["--config", cfg.to_str().unwrap(), "--R", "1.5"])).unwrap();
    assert!(text.contains("# L: 0.2\n"), "{text}");
    assert!(text.contains("# R: 1.5\n"), "{text}");
    assert!(text.contains("# window: [-5,5]\n"), "{text}");
}

#[test]
fn invalid_delta_is_rejected_by_name() {
    let out = cli(&["--command", "sim-offset", "--delta1", "0.1", "--delta2", "1.0"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("δ2 must lie in [0,1)"), "{err}");
}

#[test]
fn unknown_config_keys_and_bad_paths_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "sim-asep", "lambda": 3}"#).unwrap();
    let out = cli(&["--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));

    let missing = dir.path().join("no/such/dir/out.csv");
    let out = cli(&["--command", "sim-asep", "--M", "4", "--N", "4", "--out", missing.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("out: cannot write"));
}

#[test]
fn stdout_is_the_artifact_and_stderr_the_progress() {
    let out = cli(&["--command", "sample-ensemble", "--delta1", "0.3", "--delta2", "0.5", "--size", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("replica,x,y,in_left,in_bottom,out_right,out_top\n"));
    // Triangle of size 4 has six vertices.
    assert_eq!(text.lines().filter(|l| l.starts_with("0,")).count(), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("running"));
}
