//! End-to-end tests of the `foresight` binary: exit codes, file contracts,
//! reject handling, config precedence, and byte determinism.

use foresight_core::world::scenario::{ActorSpec, Category, RefSpeedMode, ScenarioSpec};
use foresight_core::world::suite::default_suite;
use foresight_core::world::AgentState;
use std::path::Path;
use std::process::{Command, Output};

fn foresight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foresight"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_suite_subset(dir: &Path, count: usize) {
    for scenario in default_suite().into_iter().take(count) {
        scenario
            .save(&dir.join(format!("{}.json", scenario.id)))
            .unwrap();
    }
}

/// A scenario whose no-action baseline never collides (empty road).
fn invalid_scenario() -> ScenarioSpec {
    ScenarioSpec {
        id: "empty_road".into(),
        category: Category::Stationary,
        ego_init: AgentState::car(0.0, 0.0, 0.0, 8.0),
        goal: [80.0, 0.0],
        actors: vec![],
        duration: 4.0,
        dt: 0.1,
        reference_impact_speed: RefSpeedMode::SimulatedNoAction,
    }
}

fn explicit_scenario(id: &str) -> ScenarioSpec {
    ScenarioSpec {
        id: id.into(),
        category: Category::Stationary,
        ego_init: AgentState::car(0.0, 0.0, 0.0, 8.0),
        goal: [80.0, 0.0],
        actors: vec![ActorSpec::constant_velocity(AgentState::car(
            30.0, 0.0, 0.0, 0.0,
        ))],
        duration: 4.0,
        dt: 0.1,
        reference_impact_speed: RefSpeedMode::Explicit(8.0),
    }
}

#[test]
fn closed_loop_file_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    write_suite_subset(&scenarios, 3);
    let out = tmp.path().join("out");

    let result = foresight(&[
        "closed-loop",
        "--mode",
        "agent-only",
        "--scenarios",
        scenarios.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");

    // 3 scenarios in one mode: 3 outcome files + 1 summary CSV (+ JSON).
    let outcomes: Vec<_> = std::fs::read_dir(out.join("outcomes"))
        .unwrap()
        .collect();
    assert_eq!(outcomes.len(), 3);
    assert!(out.join("summary.agent_only.csv").exists());
    assert!(out.join("summary.agent_only.json").exists());
    assert!(!out.join("summary.imagine.csv").exists());
}

#[test]
fn empty_scenario_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    let result = foresight(&[
        "closed-loop",
        "--scenarios",
        scenarios.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("no scenarios"), "stderr: {stderr}");
}

#[test]
fn missing_scenario_file_fails_with_path() {
    let result = foresight(&[
        "closed-loop",
        "--scenarios",
        "/nonexistent/path/scenario.json",
        "--out",
        "/tmp/unused_out",
    ]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("/nonexistent/path/scenario.json"), "stderr: {stderr}");
}

#[test]
fn invalid_scenario_is_rejected_and_run_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    write_suite_subset(&scenarios, 2);
    invalid_scenario()
        .save(&scenarios.join("empty_road.json"))
        .unwrap();
    let out = tmp.path().join("out");

    let result = foresight(&[
        "closed-loop",
        "--mode",
        "agent-only",
        "--scenarios",
        scenarios.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    // Partial failure: rejects listed, valid scenarios still evaluated.
    assert_eq!(result.status.code(), Some(2));
    let summary = std::fs::read_to_string(out.join("summary.agent_only.csv")).unwrap();
    assert!(summary.contains("# reject,empty_road"), "summary: {summary}");
    let outcomes: Vec<_> = std::fs::read_dir(out.join("outcomes"))
        .unwrap()
        .collect();
    assert_eq!(outcomes.len(), 2);
}

#[test]
fn summary_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    write_suite_subset(&scenarios, 4);

    let mut bytes = Vec::new();
    for run in 0..2 {
        let out = tmp.path().join(format!("out{run}"));
        let result = foresight(&[
            "closed-loop",
            "--mode",
            "both",
            "--seed",
            "7",
            "--noise-std",
            "0.2",
            "--scenarios",
            scenarios.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
        bytes.push((
            std::fs::read(out.join("summary.agent_only.csv")).unwrap(),
            std::fs::read(out.join("summary.imagine.csv")).unwrap(),
        ));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn jobs_flag_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    write_suite_subset(&scenarios, 6);

    let mut summaries = Vec::new();
    for (run, jobs) in ["1", "4"].iter().enumerate() {
        let out = tmp.path().join(format!("out{run}"));
        let result = foresight(&[
            "closed-loop",
            "--mode",
            "imagine",
            "--jobs",
            jobs,
            "--scenarios",
            scenarios.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
        summaries.push(std::fs::read(out.join("summary.imagine.csv")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn explicit_reference_speed_allows_collision_free_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    explicit_scenario("explicit_ref")
        .save(&scenarios.join("explicit_ref.json"))
        .unwrap();
    let out = tmp.path().join("out");
    let result = foresight(&[
        "closed-loop",
        "--mode",
        "agent-only",
        "--scenarios",
        scenarios.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let summary = std::fs::read_to_string(out.join("summary.agent_only.csv")).unwrap();
    assert!(summary.contains("stationary,1,0,0.00,5.0000"), "{summary}");
}

#[test]
fn open_loop_rejects_empty_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let dataset = tmp.path().join("empty.json");
    std::fs::write(&dataset, "[]").unwrap();
    let result = foresight(&[
        "open-loop",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn open_loop_skips_malformed_samples() {
    use foresight_core::world::suite::generate_openloop_dataset;
    let tmp = tempfile::tempdir().unwrap();
    let samples = generate_openloop_dataset(3, 4);
    let mut values: Vec<serde_json::Value> = samples
        .iter()
        .map(|s| serde_json::to_value(s).unwrap())
        .collect();
    values.push(serde_json::json!({"not": "a sample"}));
    let dataset = tmp.path().join("mixed.json");
    std::fs::write(&dataset, serde_json::to_string(&values).unwrap()).unwrap();

    let out = tmp.path().join("out");
    let result = foresight(&[
        "open-loop",
        "--mode",
        "imagine",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("openloop.imagine.json")).unwrap())
            .unwrap();
    assert_eq!(report["report"]["skipped"], 1);
    assert_eq!(report["report"]["samples"], 4);
}

#[test]
fn config_file_applies_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    write_suite_subset(&scenarios, 2);
    let config = tmp.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "mode = \"agent-only\"\ntheta = 0.2\nseed = 9\nscenarios = \"{}\"\n",
            scenarios.display()
        ),
    )
    .unwrap();

    // File value used when no flag is given.
    let out1 = tmp.path().join("out1");
    let result = foresight(&[
        "closed-loop",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let summary = std::fs::read_to_string(out1.join("summary.agent_only.csv")).unwrap();
    assert!(summary.contains("theta=0.2000"), "{summary}");
    assert!(summary.contains("seed=9"));

    // Flag wins over the file.
    let out2 = tmp.path().join("out2");
    let result = foresight(&[
        "closed-loop",
        "--config",
        config.to_str().unwrap(),
        "--theta",
        "0.08",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let summary = std::fs::read_to_string(out2.join("summary.agent_only.csv")).unwrap();
    assert!(summary.contains("theta=0.0800"), "{summary}");
}

#[test]
fn gen_suite_writes_loadable_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("suite");
    let result = foresight(&[
        "gen-suite",
        "--out",
        out.to_str().unwrap(),
        "--per-category",
        "2",
    ]);
    assert!(result.status.success());
    let files: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert_eq!(files.len(), 6);
    for file in files {
        ScenarioSpec::load(&file.unwrap().path()).unwrap();
    }
}

#[test]
fn traces_flag_writes_trace_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let scenarios = tmp.path().join("scenarios");
    std::fs::create_dir_all(&scenarios).unwrap();
    write_suite_subset(&scenarios, 1);
    let out = tmp.path().join("out");
    let result = foresight(&[
        "closed-loop",
        "--mode",
        "agent-only",
        "--traces",
        "--scenarios",
        scenarios.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let trace = std::fs::read_to_string(out.join("traces/stationary_00.agent_only.csv")).unwrap();
    assert!(trace.starts_with("t,x,y,heading,speed\n"));
    assert!(trace.lines().count() > 10);
}
