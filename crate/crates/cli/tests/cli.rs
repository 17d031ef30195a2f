use std::path::Path;
use std::process::{Command, Output};

fn lsalloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsalloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

const CYCLE: &str = r#"{"graph": {"family": "cycle"}, "n_values": [32, 64], "seeds": {"count": 3}}"#;

#[test]
fn sweep_writes_all_formats() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", CYCLE);
    let out = dir.path().join("out");
    let o = lsalloc(&["sweep", "--spec", &spec, "--out", out.to_str().unwrap(), "--format", "csv", "--format", "json", "--format", "svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("family,n,d,process,tie_rule,seed,balls,max_load,"));
    assert!(std::fs::read_to_string(out.join("sweep.json")).unwrap().contains("\"schema_version\": 1"));
    assert!(std::fs::read_to_string(out.join("sweep.svg")).unwrap().contains("<polyline"));
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        r#"{"graph": {"family": "random-regular", "degree": 4}, "n_values": [128, 256], "seeds": {"count": 6}, "checks": ["certificates"]}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = lsalloc(&["sweep", "--spec", &spec, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success());
        outputs.push(std::fs::read(out.join("sweep.csv")).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn run_prints_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", CYCLE);
    let o = lsalloc(&["run", "--spec", &spec, "--seed", "7", "--n", "64"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("cycle,64,2,local-search,uniform,7,64,"));
    let o = lsalloc(&["run", "--spec", &spec, "--format", "json"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("schema_version"));
}

#[test]
fn generate_graph_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", r#"{"graph": {"family": "cycle"}, "n_values": [3]}"#);
    let o = lsalloc(&["generate-graph", "--spec", &spec]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "3 3 cycle\n0 1\n0 2\n1 2\n");
    let o = lsalloc(&["generate-graph", "--spec", &spec, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(dir.path().join("sweep.edges").exists());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_spec(
        dir.path(),
        "ok.json",
        r#"{"graph": {"family": "random-regular", "degree": 4}, "n_values": [256], "seeds": {"count": 2},
            "checks": ["smoothness", "lipschitz", "removal", "majorization", "certificates", "tail", "probes"]}"#,
    );
    let o = lsalloc(&["verify", "--spec", &ok, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("sweep-verify.json").exists());

    let toward = write_spec(
        dir.path(),
        "tr.json",
        r#"{"graph": {"family": "tree-regular", "degree": 3}, "n_values": [94], "tie_rule": "toward-root", "checks": ["lipschitz"]}"#,
    );
    assert_eq!(lsalloc(&["verify", "--spec", &toward]).status.code(), Some(2));

    let broken = write_spec(
        dir.path(),
        "gen.json",
        r#"{"graph": {"family": "random-regular", "degree": 12}, "n_values": [24], "checks": ["smoothness"]}"#,
    );
    assert_eq!(lsalloc(&["verify", "--spec", &broken]).status.code(), Some(1));
}

#[test]
fn configuration_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(dir.path(), "bad.json", r#"{"graph": {"family": "grid", "dim": 2}, "n_values": [4]}"#);
    let o = lsalloc(&["sweep", "--spec", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_values"));
    let unknown = write_spec(dir.path(), "u.json", r#"{"graph": {"family": "cycle"}, "n_values": [8], "extra": 1}"#);
    assert_eq!(lsalloc(&["sweep", "--spec", &unknown]).status.code(), Some(2));
    assert_eq!(lsalloc(&["sweep", "--spec", "/no/such/spec.json"]).status.code(), Some(3));
    assert_eq!(lsalloc(&["sweep", "--spec", &bad, "--format", "png"]).status.code(), Some(2));

    // output directory path occupied by a regular file
    let ok = write_spec(dir.path(), "ok.json", CYCLE);
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(lsalloc(&["sweep", "--spec", &ok, "--out", blocker.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn plot_from_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", CYCLE);
    let out = dir.path().join("out");
    assert!(lsalloc(&["sweep", "--spec", &spec, "--out", out.to_str().unwrap(), "--format", "csv", "--format", "svg"]).status.success());
    let csv = out.join("sweep.csv");
    let plots = dir.path().join("plots");
    let o = lsalloc(&["plot", "--input", csv.to_str().unwrap(), "--out", plots.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(plots.join("sweep.svg")).unwrap(), std::fs::read(out.join("sweep.svg")).unwrap());
    assert_eq!(lsalloc(&["plot", "--input", "/no/such.csv"]).status.code(), Some(3));
}
