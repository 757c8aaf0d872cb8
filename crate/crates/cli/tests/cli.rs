use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use lancer_core::metrics::{read_history_csv, HISTORY_HEADER};
use lancer_core::problems::Dataset;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lancer"));
    c.env_remove("LANCER_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

struct Run {
    dir: tempfile::TempDir,
    base: Vec<String>,
}

impl Run {
    fn new(family: &str, mode: &str, seed: u64, sets: &[&str]) -> Run {
        let dir = tempfile::tempdir().unwrap();
        let mut base = vec![
            "--family".to_string(),
            family.to_string(),
            "--mode".to_string(),
            mode.to_string(),
            "--seed".to_string(),
            seed.to_string(),
            "--data-dir".to_string(),
            dir.path().join("data").display().to_string(),
            "--output-dir".to_string(),
            dir.path().join("out").display().to_string(),
        ];
        for s in sets {
            base.push("--set".to_string());
            base.push(s.to_string());
        }
        Run { dir, base }
    }

    fn args<'a>(&'a self, cmd: &'a str, extra: &'a [&'a str]) -> Vec<&'a str> {
        let mut v = vec![cmd];
        v.extend(self.base.iter().map(String::as_str));
        v.extend_from_slice(extra);
        v
    }

    fn out(&self, file: &str) -> PathBuf {
        self.dir.path().join("out").join(file)
    }

    fn data(&self, file: &str) -> PathBuf {
        self.dir.path().join("data").join(file)
    }
}

const SMALL_SP: &[&str] = &["data.n_train=40", "data.n_test=20", "lancer.outer_iters=3", "lancer.two_stage_updates=200"];

#[test]
fn default_shortest_path_config_generates_1000_and_1000() {
    let r = Run::new("shortest_path_lp", "lancer_po", 1, &[]);
    ok(&r.args("generate", &[]));
    let train = Dataset::from_json(&std::fs::read(r.data("train.json")).unwrap()).unwrap();
    let test = Dataset::from_json(&std::fs::read(r.data("test.json")).unwrap()).unwrap();
    assert_eq!((train.len(), test.len()), (1000, 1000));
    let manifest = json(&r.data("manifest.json"));
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["train"]["instances"], 1000);
    assert_eq!(manifest["generator"]["generator"], "shortest_path");
}

#[test]
fn regenerating_is_byte_identical() {
    let r = Run::new("multi_knapsack", "two_stage", 4, &["data.n_train=10", "data.n_test=5"]);
    ok(&r.args("generate", &[]));
    let first: Vec<Vec<u8>> = ["train.json", "test.json", "manifest.json"]
        .iter()
        .map(|f| std::fs::read(r.data(f)).unwrap())
        .collect();
    ok(&r.args("generate", &[]));
    for (f, bytes) in ["train.json", "test.json", "manifest.json"].iter().zip(first) {
        assert_eq!(std::fs::read(r.data(f)).unwrap(), bytes, "{f}");
    }
}

#[test]
fn exit_codes_separate_config_data_and_success() {
    let r = Run::new("shortest_path_lp", "lancer_zero", 1, &[]);
    let out = run(&r.args("generate", &[]));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lancer_zero"));

    let r = Run::new("shortest_path_lp", "two_stage", 1, SMALL_SP);
    assert_eq!(run(&r.args("train", &[])).status.code(), Some(3), "missing data");
    assert_eq!(run(&["train", "--family", "shortest_path_lp", "--mode", "two_stage"]).status.code(), Some(2));
    assert_eq!(run(&r.args("train", &["--set", "lancer.lr_w=-1"])).status.code(), Some(2));
    ok(&r.args("generate", &[]));
    assert_eq!(run(&r.args("evaluate", &[])).status.code(), Some(3), "missing checkpoint");
    let other = Run::new("shortest_path_lp", "two_stage", 2, SMALL_SP);
    let mut args = other.args("train", &[]);
    let data_dir = r.dir.path().join("data").display().to_string();
    let i = args.iter().position(|a| *a == "--data-dir").unwrap();
    args[i + 1] = &data_dir;
    assert_eq!(run(&args).status.code(), Some(3), "data from another seed");

    let bad = bin().args(r.args("train", &[])).env("LANCER_WORKERS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn po_summary_counts_and_history() {
    let r = Run::new("shortest_path_lp", "lancer_po", 2, SMALL_SP);
    ok(&r.args("generate", &[]));
    ok(&r.args("train", &[]));
    let s = json(&r.out("summary.json"));
    assert_eq!(s["solver_calls"], 3 * 40);
    assert_eq!(s["expected_solver_calls"], 3 * 40);
    assert_eq!(s["seed"], 2);
    assert_eq!(s["complete"], true);
    assert_eq!(s["config"]["lancer"]["outer_iters"], 3);
    let text = std::fs::read_to_string(r.out("history.csv")).unwrap();
    assert!(text.starts_with(&format!("# config_hash={}\n# seed=2\n", s["config_hash"].as_str().unwrap())));
    let rows = read_history_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.iter().map(|r| r.solver_calls).collect::<Vec<_>>(), vec![40, 80, 120]);
    assert!(rows.iter().all(|r| r.wall_time == 0.0));
    let ck = json(&r.out("checkpoint.json"));
    assert_eq!(ck["config_hash"], s["config_hash"]);
    assert_eq!(ck["seed"], 2);
}

#[test]
fn two_stage_history_has_no_rows() {
    let r = Run::new("shortest_path_lp", "two_stage", 3, SMALL_SP);
    ok(&r.args("generate", &[]));
    ok(&r.args("train", &[]));
    let text = std::fs::read_to_string(r.out("history.csv")).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, HISTORY_HEADER.join(","));
    assert!(read_history_csv(text.as_bytes()).unwrap().is_empty());
    assert_eq!(json(&r.out("summary.json"))["solver_calls"], 0);
}

#[test]
fn optimal_mode_has_zero_regret_and_random_anchors_one() {
    let r = Run::new("portfolio_qp", "optimal", 5, &["data.n_train=5", "data.n_test=6"]);
    ok(&r.args("generate", &[]));
    ok(&r.args("evaluate", &[]));
    let e = json(&r.out("eval_optimal.json"));
    assert_eq!(e["report"]["normalized_regret"], 0.0);
    assert_eq!(e["report"]["normalized_decision_loss"], 0.0);
    assert_eq!(e["instances"], 6);
    assert_eq!(e["seed"], 5);
    assert!(e["config_hash"].is_string());

    let mut args = r.args("evaluate", &[]);
    let i = args.iter().position(|a| *a == "optimal").unwrap();
    args[i] = "random";
    ok(&args);
    let e = json(&r.out("eval_random.json"));
    assert_eq!(e["report"]["normalized_decision_loss"], 1.0);
    assert_eq!(e["solver_calls"], 60);
}

#[test]
fn evaluation_is_reproducible_from_checkpoint_and_data() {
    let r = Run::new("shortest_path_lp", "lancer_po", 6, SMALL_SP);
    ok(&r.args("generate", &[]));
    ok(&r.args("train", &[]));
    ok(&r.args("evaluate", &[]));
    let first = std::fs::read(r.out("eval_lancer_po.json")).unwrap();
    ok(&r.args("evaluate", &[]));
    assert_eq!(std::fs::read(r.out("eval_lancer_po.json")).unwrap(), first);
    let e: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(e["solver_calls"], 20);
    assert_eq!(e["baseline_solver_calls"], 200);
}

const SMALL_SSP: &[&str] = &[
    "data.n_train=4",
    "data.n_test=3",
    "data.generator.grid_n=3",
    "lancer.outer_iters=3",
    "lancer.n_perturb=4",
    "lancer.surrogate_hidden=[16]",
];

#[test]
fn reused_m_uses_one_call_per_test_instance() {
    let r = Run::new("stochastic_sp", "reused_m", 7, SMALL_SSP);
    ok(&r.args("generate", &[]));
    ok(&r.args("train", &[]));
    assert_eq!(json(&r.out("summary.json"))["solver_calls"], 3 * 4 * 5);
    ok(&r.args("evaluate", &[]));
    let e = json(&r.out("eval_reused_m.json"));
    assert_eq!(e["solver_calls"], 3);
    assert_eq!(e["instances"], 3);
}

#[test]
fn zero_mode_trains_on_the_test_split() {
    let r = Run::new("stochastic_sp", "lancer_zero", 8, SMALL_SSP);
    ok(&r.args("generate", &[]));
    ok(&r.args("train", &[]));
    let s = json(&r.out("summary.json"));
    assert_eq!(s["solver_calls"], 3 * 3 * 5);
    assert_eq!(s["expected_solver_calls"], 3 * 3 * 5);
    assert!(s["train_sha256"].is_null());
    ok(&r.args("evaluate", &[]));
    let e = json(&r.out("eval_lancer_zero.json"));
    assert_eq!(e["solver_calls"], 3);
    let ck = json(&r.out("checkpoint.json"));
    for (rec, obj) in ck["zero"].as_array().unwrap().iter().zip(e["objectives"].as_array().unwrap()) {
        assert_eq!(&rec["best_objective"], obj);
    }
}

#[test]
fn interrupted_run_leaves_an_evaluable_checkpoint() {
    let r = Run::new(
        "shortest_path_lp",
        "lancer_po",
        9,
        &["data.n_train=200", "data.n_test=20", "lancer.outer_iters=100000", "lancer.two_stage_updates=50"],
    );
    ok(&r.args("generate", &[]));
    let mut child = bin().args(r.args("train", &[])).spawn().unwrap();
    let ck = r.out("checkpoint.json");
    let start = Instant::now();
    while !ck.exists() {
        assert!(start.elapsed() < Duration::from_secs(60), "no checkpoint appeared");
        assert!(child.try_wait().unwrap().is_none(), "training ended early");
        std::thread::sleep(Duration::from_millis(20));
    }
    std::thread::sleep(Duration::from_millis(200));
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(!r.out("summary.json").exists());
    ok(&r.args("evaluate", &[]));
    let e = json(&r.out("eval_lancer_po.json"));
    assert_eq!(e["checkpoint_complete"], false);
    assert_eq!(e["instances"], 20);
    let c = json(&ck);
    assert!(c["progress"].as_u64().unwrap() >= 1);
    assert_eq!(c["training_solver_calls"].as_u64().unwrap(), 200 * c["progress"].as_u64().unwrap());
}

#[test]
fn single_cell_sweep_reproduces_train() {
    let r = Run::new("shortest_path_lp", "lancer_po", 10, SMALL_SP);
    ok(&r.args("generate", &[]));
    ok(&r.args("train", &[]));
    ok(&r.args("sweep", &["--grid", "custom", "--axis", "lancer.lr_w=0.001"]));
    let sweep = json(&r.out("sweep_custom.json"));
    let cells = sweep["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0]["summary"], json(&r.out("summary.json")));
    ok(&r.args("evaluate", &[]));
    let mut eval = json(&r.out("eval_lancer_po.json"));
    eval["checkpoint_sha256"] = Value::Null;
    assert_eq!(cells[0]["eval"], eval);
    let table = std::fs::read_to_string(r.out("sweep_custom.csv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "cell,lancer.lr_w,status,final_objective,normalized_regret,solver_calls,config_hash,error"
    );
    assert_eq!(rows.len(), 2);
}

#[test]
fn sweep_records_failing_cells_and_continues() {
    let r = Run::new("shortest_path_lp", "lancer_po", 11, SMALL_SP);
    ok(&r.args("generate", &[]));
    ok(&r.args("sweep", &["--grid", "custom", "--axis", "lancer.lr_w=0.001;-1"]));
    let sweep = json(&r.out("sweep_custom.json"));
    assert_eq!(sweep["succeeded"], 1);
    assert_eq!(sweep["failed"], 1);
    assert_eq!(sweep["cells"][1]["status"], "failed");
    assert!(sweep["cells"][1]["error"].as_str().unwrap().contains("lr_w"));
    assert_eq!(run(&r.args("sweep", &["--grid", "custom"])).status.code(), Some(2));
}

#[test]
fn report_merges_histories_into_a_curve() {
    let a = Run::new("shortest_path_lp", "lancer_po", 12, SMALL_SP);
    ok(&a.args("generate", &[]));
    ok(&a.args("train", &[]));
    let out = tempfile::tempdir().unwrap();
    let run_dir = a.dir.path().join("out").display().to_string();
    let out_dir = out.path().display().to_string();
    ok(&["report", "--run", &run_dir, "--out", &out_dir]);
    let curve = std::fs::read(out.path().join("curve.csv")).unwrap();
    let points = lancer_core::metrics::read_curve_csv(curve.as_slice()).unwrap();
    assert_eq!(points.iter().map(|p| p.solver_calls).collect::<Vec<_>>(), vec![40, 80, 120]);
    assert!(points.iter().all(|p| p.method == "lancer_po"));
    let report = json(&out.path().join("report.json"));
    assert_eq!(report["inputs"][0]["seed"], 12);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let mut digests = Vec::new();
    for workers in ["1", "3"] {
        let r = Run::new("stochastic_sp", "lancer_zero", 13, SMALL_SSP);
        for cmd in ["generate", "train", "evaluate"] {
            let out = bin().args(r.args(cmd, &[])).env("LANCER_WORKERS", workers).output().unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        let files: Vec<Vec<u8>> = ["checkpoint.json", "history.csv", "summary.json", "eval_lancer_zero.json"]
            .iter()
            .map(|f| std::fs::read(r.out(f)).unwrap())
            .collect();
        digests.push(files);
    }
    assert_eq!(digests[0], digests[1]);
}
