//! Deterministic 2D kinematic driving world: scene state, unicycle ego
//! dynamics, oriented-rectangle collision checks, scripted scenarios, a
//! sampling lattice planner, a constant-velocity scene imaginer, and a
//! closed-loop simulator.

pub mod closed_loop;
pub mod collision;
pub mod imaginer;
pub mod planner;
pub mod scenario;
pub mod suite;

pub use closed_loop::{
    run_closed_loop, run_closed_loop_with, ClosedLoopOutcome, LoopStepStats, Mode, TraceSample,
};
pub use collision::check_collision;
pub use imaginer::{toy_imagine, ToyImaginer};
pub use planner::{toy_plan, SamplerConfig, ToyPlanner};
pub use scenario::{ActorMotion, ActorSpec, Category, RefSpeedMode, ScenarioSpec};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};
use serde::{Deserialize, Serialize};

/// Command bound: maximum longitudinal acceleration magnitude, m/s^2.
pub const ACCEL_LIMIT: f64 = 6.0;
/// Command bound: maximum yaw rate magnitude, rad/s.
pub const YAW_RATE_LIMIT: f64 = 0.6;
/// Default vehicle footprint, meters.
pub const DEFAULT_LENGTH: f64 = 4.0;
pub const DEFAULT_WIDTH: f64 = 1.8;

/// Pose, speed and footprint of one vehicle in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    /// Radians, normalized to (-pi, pi].
    pub heading: f64,
    /// m/s, non-negative.
    pub speed: f64,
    /// Footprint length along the heading, meters.
    pub length: f64,
    /// Footprint width, meters.
    pub width: f64,
}

impl AgentState {
    /// A default-footprint car.
    pub fn car(x: f64, y: f64, heading: f64, speed: f64) -> Self {
        AgentState {
            x,
            y,
            heading: wrap_angle(heading),
            speed,
            length: DEFAULT_LENGTH,
            width: DEFAULT_WIDTH,
        }
    }

    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_heading(self.heading) * self.speed
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.x, self.y, self.heading, self.speed, self.length, self.width];
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid_input("agent state has non-finite fields"));
        }
        if self.length <= 0.0 || self.width <= 0.0 {
            return Err(Error::invalid_input("agent extent must be positive"));
        }
        if self.speed < 0.0 {
            return Err(Error::invalid_input("agent speed must be non-negative"));
        }
        Ok(())
    }
}

/// One world frame: timestamp, ego state and actor states. The actor list
/// keeps a stable order across frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub time: f64,
    pub ego: AgentState,
    pub actors: Vec<AgentState>,
}

impl SceneState {
    pub fn new(time: f64, ego: AgentState, actors: Vec<AgentState>) -> Self {
        SceneState { time, ego, actors }
    }
}

/// Result of one simulation step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SceneState,
    /// True when a command exceeded its bound and was clamped.
    pub clamped: bool,
}

/// Advance the world by `dt`: the ego integrates unicycle kinematics
/// (semi-implicit: speed and heading first, then position with the new
/// values; speed clamps at zero), scripted actors move to their scheduled
/// states at the new time. Out-of-bound commands are clamped and flagged,
/// never rejected.
pub fn step_world(
    state: &SceneState,
    actors: &[ActorSpec],
    ego_accel: f64,
    ego_yaw_rate: f64,
    dt: f64,
) -> Result<StepOutcome> {
    if !(dt > 0.0) {
        return Err(Error::invalid_input("step_world: dt must be positive"));
    }
    let clamped = ego_accel.abs() > ACCEL_LIMIT || ego_yaw_rate.abs() > YAW_RATE_LIMIT;
    let accel = ego_accel.clamp(-ACCEL_LIMIT, ACCEL_LIMIT);
    let yaw_rate = ego_yaw_rate.clamp(-YAW_RATE_LIMIT, YAW_RATE_LIMIT);

    let mut ego = state.ego;
    ego.speed = (ego.speed + accel * dt).max(0.0);
    ego.heading = wrap_angle(ego.heading + yaw_rate * dt);
    let step = Vec2::from_heading(ego.heading) * (ego.speed * dt);
    ego.x += step.x;
    ego.y += step.y;

    let time = state.time + dt;
    let actor_states: Vec<AgentState> = actors.iter().map(|a| a.state_at(time)).collect();

    Ok(StepOutcome {
        state: SceneState::new(time, ego, actor_states),
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_velocity_advance() {
        let scene = SceneState::new(0.0, AgentState::car(0.0, 0.0, 0.0, 10.0), vec![]);
        let out = step_world(&scene, &[], 0.0, 0.0, 0.1).unwrap();
        assert!(!out.clamped);
        assert!((out.state.ego.x - 1.0).abs() < 1e-12);
        assert_eq!(out.state.ego.y, 0.0);
        assert_eq!(out.state.ego.speed, 10.0);
        assert!((out.state.time - 0.1).abs() < 1e-12);
    }

    #[test]
    fn no_reverse_from_standstill() {
        let scene = SceneState::new(0.0, AgentState::car(5.0, 1.0, 0.3, 0.0), vec![]);
        let out = step_world(&scene, &[], -3.0, 0.0, 0.1).unwrap();
        assert_eq!(out.state.ego.speed, 0.0);
        assert_eq!(out.state.ego.x, 5.0);
        assert_eq!(out.state.ego.y, 1.0);
    }

    #[test]
    fn semi_implicit_accel_step() {
        // Speed updates first, then displacement uses the new speed.
        let scene = SceneState::new(0.0, AgentState::car(0.0, 0.0, 0.0, 5.0), vec![]);
        let out = step_world(&scene, &[], 2.0, 0.0, 0.1).unwrap();
        assert!((out.state.ego.speed - 5.2).abs() < 1e-12);
        assert!((out.state.ego.x - 0.52).abs() < 1e-12);
    }

    #[test]
    fn out_of_bound_commands_clamp_with_flag() {
        let scene = SceneState::new(0.0, AgentState::car(0.0, 0.0, 0.0, 5.0), vec![]);
        let out = step_world(&scene, &[], 20.0, 0.0, 0.1).unwrap();
        assert!(out.clamped);
        assert!((out.state.ego.speed - (5.0 + ACCEL_LIMIT * 0.1)).abs() < 1e-12);
        let out = step_world(&scene, &[], 0.0, -2.0, 0.1).unwrap();
        assert!(out.clamped);
        assert!((out.state.ego.heading - wrap_angle(-YAW_RATE_LIMIT * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn speed_constant_over_many_steps() {
        let mut scene = SceneState::new(0.0, AgentState::car(0.0, 0.0, 0.2, 7.25), vec![]);
        for _ in 0..1000 {
            scene = step_world(&scene, &[], 0.0, 0.0, 0.05).unwrap().state;
        }
        assert_eq!(scene.ego.speed, 7.25);
    }

    #[test]
    fn zero_dt_rejected() {
        let scene = SceneState::new(0.0, AgentState::car(0.0, 0.0, 0.0, 5.0), vec![]);
        assert!(step_world(&scene, &[], 0.0, 0.0, 0.0).is_err());
    }
}
