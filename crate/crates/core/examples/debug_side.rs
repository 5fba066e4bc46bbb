// Scratch probe: why does imagine mode miss side crossings?
use foresight_core::engine::{extract_keyframes, LoopConfig, ObservationHistory, SceneImaginer};
use foresight_core::harness::{run_scenario, RunOptions};
use foresight_core::world::suite::default_suite;
use foresight_core::world::{toy_plan, Mode, SamplerConfig, SceneState, ToyImaginer};
use foresight_core::geometry::Vec2;

fn main() {
    let suite = default_suite();
    let scenario = suite.iter().find(|s| s.id == std::env::args().nth(1).as_deref().unwrap_or("side_00")).unwrap();
    println!("{}", serde_json::to_string_pretty(scenario).unwrap());

    // Reconstruct the first replan: history back-filled like the simulator.
    let dt = scenario.dt;
    let frames: Vec<SceneState> = (0..4)
        .map(|i| {
            let t = -(3 - i) as f64 * dt;
            let ego = scenario.ego_init;
            let back = Vec2::from_heading(ego.heading) * (ego.speed * t);
            let past = foresight_core::world::AgentState {
                x: ego.x + back.x,
                y: ego.y + back.y,
                ..ego
            };
            SceneState::new(t, past, scenario.actor_states_at(t))
        })
        .collect();
    let history = ObservationHistory::new(frames).unwrap();
    let current = history.current().clone();

    let cfg = SamplerConfig::default();
    let blind = toy_plan(&current, current.ego.speed, scenario.goal_vec(), None, &cfg).unwrap();
    println!("blind plan:");
    for w in blind.waypoints() {
        println!("  t={} x={:.2} y={:.2}", w.t, w.x, w.y);
    }

    let mut imaginer = ToyImaginer::new(0.0, 1);
    let seq = imaginer.imagine(&history, &blind).unwrap();
    let keyframes = extract_keyframes(&seq, &[0.5, 1.0]).unwrap();
    for kf in &keyframes {
        println!(
            "keyframe t={:.1}: ego=({:.2},{:.2}) actor=({:.2},{:.2}) h={:.2} v={:.2}",
            kf.time,
            kf.ego.x,
            kf.ego.y,
            kf.actors[0].x,
            kf.actors[0].y,
            kf.actors[0].heading,
            kf.actors[0].speed
        );
    }

    let informed = toy_plan(
        &current,
        current.ego.speed,
        scenario.goal_vec(),
        Some(&keyframes),
        &cfg,
    )
    .unwrap();
    println!("informed plan:");
    for w in informed.waypoints() {
        println!("  t={} x={:.2} y={:.2}", w.t, w.x, w.y);
    }

    let outcome = run_scenario(scenario, Mode::Imagine, &RunOptions::default()).unwrap();
    println!(
        "closed loop: collided={} v_i={:?} t={:?}",
        outcome.collided, outcome.impact_speed, outcome.collision_time
    );
    for s in outcome.ego_trace.iter().take(20) {
        println!(
            "  t={:3.1} x={:6.2} y={:6.2} h={:6.3} v={:6.2}",
            s.t, s.x, s.y, s.heading, s.speed
        );
    }
    let _ = LoopConfig::default();
}
