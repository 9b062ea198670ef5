use std::path::PathBuf;
use std::process::Command;

use modeplan::{parse_scenario, Scenario};
use modeplan_cli::{bench, read_plan, replay_error, run_scenario, write_artifacts, RunOptions, Stats};
use proptest::prelude::*;

fn scenario_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect()
}

fn scenario(name: &str) -> Scenario {
    parse_scenario(scenario_path(name)).unwrap()
}

#[test]
fn stats_examples() {
    let s = Stats::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!((s.mean, s.min, s.max), (2.5, 1.0, 4.0));
    assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(Stats::of(&[7.0]).unwrap().std, 0.0);
    assert!(Stats::of(&[]).is_none());
}

proptest! {
    #[test]
    fn stats_are_ordered(xs in prop::collection::vec(-1e3..1e3f64, 1..20)) {
        let s = Stats::of(&xs).unwrap();
        prop_assert!(s.min <= s.mean + 1e-9 && s.mean <= s.max + 1e-9);
        prop_assert!(s.std >= 0.0);
    }
}

#[test]
fn run_writes_replayable_artifacts() {
    let sc = scenario("door_push.json");
    let opts = RunOptions {
        seed: 7,
        postprocess: true,
        ..RunOptions::default()
    };
    let out = run_scenario(&sc, &opts);
    assert!(out.record.solved());
    let dir = tempfile::tempdir().unwrap();
    write_artifacts(dir.path(), &out, &sc).unwrap();

    let file = read_plan(&dir.path().join("plan.json")).unwrap();
    assert_eq!(&file.plan, out.final_plan().unwrap());
    assert!(file.refined);
    assert!(replay_error(&file.plan, &sc) < 1e-9);

    let rec: modeplan_cli::RunRecord =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(rec, out.record);

    let mut rd = csv::Reader::from_path(dir.path().join("traj.csv")).unwrap();
    let header = rd.headers().unwrap().clone();
    assert_eq!(header.len(), 12);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), file.plan.states().len());
    let x_end: f64 = rows.last().unwrap()[3].parse().unwrap();
    assert_eq!(x_end, file.plan.states().last().unwrap()[0]);
    assert_eq!(&rows.last().unwrap()[10], "");
}

#[test]
fn extension_budget_is_exact() {
    let sc = scenario("door_pull.json");
    let out = run_scenario(
        &sc,
        &RunOptions {
            seed: 1,
            max_extensions: Some(40),
            ..RunOptions::default()
        },
    );
    assert!(!out.record.solved());
    assert_eq!(out.record.extensions_attempted, 40);
    assert!(out.plan.is_none());
}

#[test]
fn bench_rows_and_determinism() {
    let sc = scenario("door_push.json");
    let opts = RunOptions::default();
    let seeds = [0, 1, 2, 3, 4];
    let (rows, records) = bench(std::slice::from_ref(&sc), &seeds, &opts, 2);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!((row.runs, row.solved), (5, 5));
    let st = row.plan_time_s.unwrap();
    assert!(st.min <= st.mean && st.mean <= st.max && st.std >= 0.0);
    assert!(row.behavior_min_duration_s.unwrap() > 0.0);
    assert!(row.extension_mean_ms.unwrap() > 0.0);

    let (again, records2) = bench(std::slice::from_ref(&sc), &seeds, &opts, 1);
    assert_eq!(again[0].canonical(), row.canonical());
    for (a, b) in records[0].iter().zip(&records2[0]) {
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}

#[test]
fn bench_without_solutions_is_flagged() {
    let sc = scenario("door_pull.json");
    let opts = RunOptions {
        max_extensions: Some(5),
        ..RunOptions::default()
    };
    let (rows, _) = bench(std::slice::from_ref(&sc), &[0, 1], &opts, 1);
    assert!(rows[0].flagged());
    assert_eq!(rows[0].failed_seeds, vec![0, 1]);
    assert!(rows[0].plan_time_s.is_none() && rows[0].behavior_min_duration_s.is_none());
    let table = modeplan_cli::format_table(&rows);
    assert!(table.contains("no solution"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_modeplan");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": 3}").unwrap();
    let st = Command::new(bin).args(["run", "--scenario"]).arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let out = dir.path().join("none");
    let st = Command::new(bin)
        .args(["run", "--max-extensions", "3", "--scenario"])
        .arg(scenario_path("door_pull.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
    assert!(out.join("run.json").exists());
    assert!(!out.join("plan.json").exists());

    let out = dir.path().join("ok");
    let st = Command::new(bin)
        .args(["run", "--seed", "7", "--postprocess", "--scenario"])
        .arg(scenario_path("door_push.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    for f in ["plan.json", "run.json", "traj.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
