use std::process::Command;

use fairclust::bench::{run, ExperimentConfig, RunOptions, CSV_HEADER};
use fairclust::gen::{instance_with_shape, micro_suite, MicroShape};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairclust"))
}

fn micro_config(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("micro.json");
    std::fs::write(
        &path,
        r#"{
            "name": "micro",
            "datasets": [{"micro": {"seed": 3, "count": 2}}],
            "algorithms": ["iterative_rounding", "abv", "best_k_subset_pipeline", "brute_force"],
            "params": {"lambda": [0.3], "epsilon": [0.2]},
            "timing": false
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn run_writes_report_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = micro_config(dir.path());
    let out = dir.path().join("out");
    let status = bin().arg("run").arg(&cfg).arg("--out").arg(&out).arg("--threads").arg("1").status().unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    // 2 instances x (1 + 1 + 1 + 1) rows
    assert_eq!(lines.count(), 8);
    assert!(out.join("report.json").exists());
}

#[test]
fn reruns_are_byte_identical_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load(micro_config(dir.path())).unwrap();
    let a = run(&cfg, &RunOptions::default()).unwrap().to_csv();
    let b = run(&cfg, &RunOptions::default()).unwrap().to_csv();
    assert_eq!(a, b);
    for row in a.lines().skip(1) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8, "{row}");
        assert_eq!(fields[7], "0.000");
    }
}

#[test]
fn oracle_prints_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let inst = &micro_suite(9, 1)[0];
    let path = dir.path().join("inst.json");
    std::fs::write(&path, inst.to_json_string().unwrap()).unwrap();
    let out = bin().arg("oracle").arg(&path).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let (_, opt) = fairclust::brute_force_opt(inst, &Default::default()).unwrap();
    assert!((v["objective"].as_f64().unwrap() - opt.objective).abs() < 1e-12);
}

#[test]
fn failing_rows_set_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // C(40, 12) subsets is past the oracle cap, so the brute-force row fails
    // while the rounding row succeeds
    let shape = MicroShape {
        clients: 40,
        facilities: 40,
        k: 12,
        groups: 2,
        p: 1.0,
        dim: 2,
        side: 10.0,
    };
    let inst = instance_with_shape(1, shape);
    std::fs::write(dir.path().join("big.json"), inst.to_json_string().unwrap()).unwrap();
    let cfg = dir.path().join("big_run.json");
    std::fs::write(
        &cfg,
        r#"{"name": "big", "datasets": [{"instance": "big.json"}], "algorithms": ["iterative_rounding", "brute_force"], "timing": false}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = bin().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",iterative_rounding,12,"), "{}", rows[0]);
    assert!(!rows[0].contains(",,"), "{}", rows[0]);
    // failed rows keep their identity and leave the cost columns empty
    assert!(rows[1].contains(",brute_force,12,,,,"), "{}", rows[1]);
}
