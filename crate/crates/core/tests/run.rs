use std::path::PathBuf;

use rigidity::harness::report::schema_of;
use rigidity::harness::{run, ExperimentConfig, Status, SCHEMA_VERSION};

fn config(name: &str) -> ExperimentConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&p).unwrap()
}

#[test]
fn golden_run_passes_every_entry() {
    let r = run(&config("fuchsian_tau3.toml"));
    assert!(r.errors.is_empty(), "{:?}", r.errors);
    let keys: Vec<&str> = r.ledger.keys().map(|s| s.as_str()).collect();
    assert_eq!(keys, ["AC1", "AC3", "AC5", "AC6", "AC8", "AC9"]);
    for (id, e) in &r.ledger {
        assert_eq!(e.status, Status::Pass, "{id}: {e:?}");
    }
    assert!(r.passed());
    assert_eq!(r.schema_version, SCHEMA_VERSION);
}

#[test]
fn report_schema_matches_golden() {
    let r = run(&config("fuchsian_tau3.toml"));
    let schema = schema_of(&serde_json::to_value(&r).unwrap());
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/report_schema.json");
    let text = serde_json::to_string_pretty(&schema).unwrap() + "\n";
    if std::env::var_os("RIGIDITY_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, golden, "report structure changed; bump the schema version and regenerate the golden file");
}

#[test]
fn identical_configs_give_identical_reports() {
    let c = config("perturbed_tau4.toml");
    let a = run(&c).without_timings().to_json().unwrap();
    let b = run(&c).without_timings().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn negative_control_records_failure_and_skips() {
    let r = run(&config("negative_control.toml"));
    assert!(!r.passed());
    assert_eq!(r.errors.len(), 1);
    assert_eq!(r.errors[0].stage, "evaluate");
    assert!(r.errors[0].message.contains("not proximal"));
    for id in ["AC5", "AC6", "AC8", "AC9"] {
        assert_eq!(r.ledger[id].status, Status::Skipped, "{id}");
    }
    assert!(r.results.rank.is_none() && r.results.entropy.is_none());
}

#[test]
fn perturbed_and_klein_configs_pass() {
    for name in ["perturbed_tau4.toml", "klein_h3.toml"] {
        let r = run(&config(name));
        assert!(r.passed(), "{name}: {:?} {:?}", r.errors, r.ledger);
    }
}
