// Scratch probe for closed-loop behavior; not part of the deliverable API.
use foresight_core::engine::LoopConfig;
use foresight_core::world::scenario::{ActorSpec, Category, RefSpeedMode, ScenarioSpec};
use foresight_core::world::{run_closed_loop, AgentState, Mode};

fn main() {
    let wall = ActorSpec::constant_velocity(AgentState::car(20.0, 0.0, 0.0, 0.0));
    let scenario = ScenarioSpec {
        id: "debug".into(),
        category: Category::Stationary,
        ego_init: AgentState::car(0.0, 0.0, 0.0, 8.0),
        goal: [80.0, 0.0],
        actors: vec![wall],
        duration: 6.0,
        dt: 0.1,
        reference_impact_speed: RefSpeedMode::SimulatedNoAction,
    };
    let outcome = run_closed_loop(
        &scenario,
        Mode::AgentOnly,
        &LoopConfig::default(),
        2.0,
        0.0,
        1,
    )
    .unwrap();
    println!(
        "collided={} v_i={:?} t={:?}",
        outcome.collided, outcome.impact_speed, outcome.collision_time
    );
    for s in outcome.ego_trace.iter() {
        println!(
            "t={:4.1} x={:7.3} y={:7.3} h={:6.3} v={:6.3}",
            s.t, s.x, s.y, s.heading, s.speed
        );
    }
}
