//! Report writing: CSV bodies with the resolved-config header, JSON
//! mirrors, and per-run output files. All emission is deterministic for a
//! fixed config and seed.

use anyhow::{Context, Result};
use foresight_core::metrics::{pdms, PdmsSubscores, PdmsWeights, SuiteSummary};
use foresight_core::world::{ClosedLoopOutcome, ScenarioSpec};
use serde_json::json;
use std::path::Path;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

/// Progress ratio for the PDM-score surrogate: displacement toward the goal
/// over the distance a constant-speed ego would cover.
pub fn progress_ratio(scenario: &ScenarioSpec, outcome: &ClosedLoopOutcome) -> f64 {
    let (Some(first), Some(last)) = (outcome.ego_trace.first(), outcome.ego_trace.last()) else {
        return 0.0;
    };
    let goal = scenario.goal_vec();
    let start = foresight_core::geometry::Vec2::new(first.x, first.y);
    let end = foresight_core::geometry::Vec2::new(last.x, last.y);
    let to_goal = goal - start;
    let dist = to_goal.norm();
    if dist < 1e-9 {
        return 1.0;
    }
    let along = (end - start).dot(to_goal) / dist;
    let budget = (scenario.ego_init.speed * scenario.duration).max(1e-9);
    (along / budget).clamp(0.0, 1.0)
}

/// PDM-score surrogate for one closed-loop outcome.
pub fn pdms_surrogate(scenario: &ScenarioSpec, outcome: &ClosedLoopOutcome) -> f64 {
    let sub = PdmsSubscores::surrogate(outcome.collided, progress_ratio(scenario, outcome));
    pdms(&sub, &PdmsWeights::default()).unwrap_or(0.0)
}

/// Summary CSV: config header, fixed columns, then a rejects section.
pub fn summary_csv(header: &str, summary: &SuiteSummary, rejects: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    out.push_str(&summary.to_csv());
    for (id, reason) in rejects {
        out.push_str(&format!("# reject,{id},{reason}\n"));
    }
    out
}

/// Per-outcome JSON document with the PDM-score surrogate attached.
pub fn outcome_json(scenario: &ScenarioSpec, outcome: &ClosedLoopOutcome) -> serde_json::Value {
    let mut value = serde_json::to_value(outcome).expect("outcome serializes");
    value["pdms_surrogate"] = json!(pdms_surrogate(scenario, outcome));
    value
}

/// Ego trace CSV: `t,x,y,heading,speed`.
pub fn trace_csv(outcome: &ClosedLoopOutcome) -> String {
    let mut out = String::from("t,x,y,heading,speed\n");
    for s in &outcome.ego_trace {
        out.push_str(&format!(
            "{:.2},{:.4},{:.4},{:.5},{:.4}\n",
            s.t, s.x, s.y, s.heading, s.speed
        ));
    }
    out
}
