// Scratch probe: per-draw behavior of the side scenarios.
use foresight_core::harness::{run_scenario, RunOptions};
use foresight_core::world::suite::default_suite;
use foresight_core::world::Mode;

fn main() {
    for scenario in default_suite().iter().filter(|s| s.category.name() == "side") {
        let crosser = &scenario.actors[0].init;
        let outcome = run_scenario(scenario, Mode::Imagine, &RunOptions::default()).unwrap();
        let first_stats = outcome.per_step_loop_stats.first().unwrap();
        println!(
            "{} v_e={:.2} cross=({:.2},{:.2}) v_c={:.2} collided={} v_i={:.2?} t={:.2?} refinements@0={}",
            scenario.id,
            scenario.ego_init.speed,
            crosser.x,
            crosser.y,
            crosser.speed,
            outcome.collided,
            outcome.impact_speed,
            outcome.collision_time,
            first_stats.refinements_used,
        );
    }
}
