//! Every checked-in fuzz seed must be accepted and round-trip, so the
//! corpus keeps exercising the success paths of each parser.

use std::path::PathBuf;

use lancer_cli::checkpoint::RunCheckpoint;
use lancer_cli::config::{Overrides, RunConfig};
use lancer_core::diffmodels::MlpModel;
use lancer_core::metrics::{read_curve_csv, read_history_csv, write_curve_csv, write_history_csv};
use lancer_core::problems::Dataset;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn dataset_seeds_round_trip() {
    for (name, bytes) in seeds("dataset_json") {
        let (ds, prov) = Dataset::from_json_with_provenance(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = ds.to_json_with_provenance(&prov).unwrap();
        assert_eq!(Dataset::from_json_with_provenance(&again).unwrap(), (ds, prov), "{name}");
    }
}

#[test]
fn model_seeds_round_trip() {
    for (name, bytes) in seeds("mlp_checkpoint_binary") {
        let m = MlpModel::from_bytes(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(m.to_bytes(), bytes, "{name}");
    }
    for (name, bytes) in seeds("mlp_checkpoint_json") {
        let m = MlpModel::from_json(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        let back = MlpModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.to_bytes(), m.to_bytes(), "{name}");
    }
}

#[test]
fn config_and_checkpoint_seeds_round_trip() {
    for (name, bytes) in seeds("run_config") {
        let cfg = RunConfig::resolve(Some(&bytes), &Overrides::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let back = RunConfig::resolve(Some(&cfg.to_json()), &Overrides::default()).unwrap();
        assert_eq!(back.hash(), cfg.hash(), "{name}");
    }
    for (name, bytes) in seeds("run_checkpoint") {
        let ck = RunCheckpoint::from_json(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(ck.to_json().unwrap(), bytes, "{name}");
    }
}

#[test]
fn csv_seeds_round_trip() {
    for (name, bytes) in seeds("history_csv") {
        let rows = read_history_csv(bytes.as_slice()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut out = Vec::new();
        write_history_csv(&rows, &mut out, None).unwrap();
        assert_eq!(read_history_csv(out.as_slice()).unwrap(), rows, "{name}");
    }
    for (name, bytes) in seeds("curve_csv") {
        let points = read_curve_csv(bytes.as_slice()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut out = Vec::new();
        write_curve_csv(&points, &mut out, None).unwrap();
        assert_eq!(read_curve_csv(out.as_slice()).unwrap(), points, "{name}");
    }
}
