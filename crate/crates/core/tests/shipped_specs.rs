use lsalloc::harness::{load_spec, verify, Process};
use lsalloc::par::Execution;

fn specs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

#[test]
fn every_shipped_spec_loads() {
    let mut count = 0;
    for entry in std::fs::read_dir(specs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let spec = load_spec(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(spec.process, Process::LocalSearch);
            count += 1;
        }
    }
    assert!(count >= 4);
}

#[test]
fn shipped_verify_spec_passes() {
    let spec = load_spec(specs_dir().join("verify-rr256.json")).unwrap();
    let report = verify::verify(&spec, Execution::Parallel).unwrap();
    assert!(report.passed(), "{}", report.summary());
}
