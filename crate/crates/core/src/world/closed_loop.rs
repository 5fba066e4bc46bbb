//! Closed-loop scenario execution: replan at a fixed rate, track the
//! selected trajectory with a pure-pursuit controller between plans, record
//! the first contact and the relative speed at impact, and obtain the
//! reference impact speed from a no-action rerun when the scenario asks
//! for it.

use super::collision::check_collision;
use super::scenario::{RefSpeedMode, ScenarioSpec};
use super::{step_world, AgentState, Category, SceneState, ToyImaginer, ToyPlanner};
use crate::engine::{run_loop, DrivingAgent, LoopConfig, ObservationHistory, SceneImaginer};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};
use crate::trajectory::Trajectory;
use crate::world::{ACCEL_LIMIT, YAW_RATE_LIMIT};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Planner operating mode: current frame only, or the full refinement loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    AgentOnly,
    Imagine,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::AgentOnly => "agent_only",
            Mode::Imagine => "imagine",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "agent_only" | "agentonly" => Ok(Mode::AgentOnly),
            "imagine" => Ok(Mode::Imagine),
            other => Err(Error::config(format!("unknown mode `{other}`"))),
        }
    }
}

/// One row of the ego trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

impl TraceSample {
    fn of(state: &SceneState) -> Self {
        TraceSample {
            t: state.time,
            x: state.ego.x,
            y: state.ego.y,
            heading: state.ego.heading,
            speed: state.ego.speed,
        }
    }
}

/// Loop statistics recorded at one replanning tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopStepStats {
    pub refinements_used: usize,
    pub stop_tcr: Option<f64>,
}

/// Result of one closed-loop scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopOutcome {
    pub scenario_id: String,
    pub category: Category,
    pub mode: Mode,
    pub collided: bool,
    /// Relative speed magnitude at first contact, m/s.
    pub impact_speed: Option<f64>,
    /// Reference impact speed of the no-action baseline (or the explicit
    /// override), m/s.
    pub reference_speed: Option<f64>,
    pub collision_time: Option<f64>,
    pub ego_trace: Vec<TraceSample>,
    pub per_step_loop_stats: Vec<LoopStepStats>,
}

/// The selected trajectory lifted into the world frame at plan time, with
/// the plan-time ego position prepended at offset zero.
struct PlannedPath {
    start_time: f64,
    points: Vec<(f64, Vec2)>,
}

impl PlannedPath {
    fn new(trajectory: &Trajectory, ego: &AgentState, time: f64) -> Self {
        let mut points = Vec::with_capacity(trajectory.len() + 1);
        points.push((0.0, ego.pos()));
        for w in trajectory.waypoints() {
            points.push((w.t, ego.pos() + w.pos().rotate(ego.heading)));
        }
        PlannedPath {
            start_time: time,
            points,
        }
    }

    /// Position at `offset` seconds after plan time, clamped to the ends.
    fn position_at(&self, offset: f64) -> Vec2 {
        if offset <= 0.0 {
            return self.points[0].1;
        }
        for pair in self.points.windows(2) {
            let ((t0, p0), (t1, p1)) = (pair[0], pair[1]);
            if offset <= t1 {
                let alpha = (offset - t0) / (t1 - t0);
                return p0 + (p1 - p0) * alpha;
            }
        }
        self.points.last().unwrap().1
    }
}

/// Pure-pursuit command toward the time-indexed path: speed from the local
/// path displacement, yaw rate from the curvature to a lookahead target.
fn track(path: &PlannedPath, ego: &AgentState, now: f64) -> (f64, f64) {
    const SPEED_WINDOW: f64 = 0.25;
    const LOOKAHEAD: f64 = 0.6;

    let elapsed = now - path.start_time;
    let ahead = path.position_at(elapsed + SPEED_WINDOW);
    let here = path.position_at(elapsed);
    let desired_speed = ahead.distance(here) / SPEED_WINDOW;
    let accel = ((desired_speed - ego.speed) / SPEED_WINDOW).clamp(-ACCEL_LIMIT, ACCEL_LIMIT);

    let target = path.position_at(elapsed + LOOKAHEAD);
    let offset = target - ego.pos();
    let dist = offset.norm();
    let yaw_rate = if dist < 0.3 {
        0.0
    } else {
        let alpha = wrap_angle(offset.y.atan2(offset.x) - ego.heading);
        let curvature = 2.0 * alpha.sin() / dist;
        (ego.speed * curvature).clamp(-YAW_RATE_LIMIT, YAW_RATE_LIMIT)
    };
    (accel, yaw_rate)
}

trait Controller {
    fn command(&mut self, state: &SceneState, history: &ObservationHistory) -> Result<(f64, f64)>;
}

/// Constant-velocity ego: the no-action baseline.
struct NoAction;

impl Controller for NoAction {
    fn command(&mut self, _state: &SceneState, _history: &ObservationHistory) -> Result<(f64, f64)> {
        Ok((0.0, 0.0))
    }
}

/// Replans with the refinement loop at a fixed rate and tracks the selected
/// trajectory in between.
struct PolicyController<'a> {
    agent: &'a mut dyn DrivingAgent,
    imaginer: &'a mut dyn SceneImaginer,
    config: LoopConfig,
    replan_interval: f64,
    next_replan: f64,
    path: Option<PlannedPath>,
    stats: Vec<LoopStepStats>,
}

impl Controller for PolicyController<'_> {
    fn command(&mut self, state: &SceneState, history: &ObservationHistory) -> Result<(f64, f64)> {
        if state.time + 1e-9 >= self.next_replan {
            let result = run_loop(
                self.agent,
                self.imaginer,
                history,
                state.ego.speed,
                &self.config,
            )?;
            self.stats.push(LoopStepStats {
                refinements_used: result.refinements_used,
                stop_tcr: result.stop_tcr,
            });
            self.path = Some(PlannedPath::new(&result.selected, &state.ego, state.time));
            self.next_replan += self.replan_interval;
        }
        let path = self.path.as_ref().unwrap();
        Ok(track(path, &state.ego, state.time))
    }
}

struct SimOutcome {
    collided: bool,
    impact_speed: Option<f64>,
    collision_time: Option<f64>,
    trace: Vec<TraceSample>,
}

fn first_contact(state: &SceneState) -> Option<f64> {
    for actor in &state.actors {
        if check_collision(&state.ego, actor) {
            return Some((state.ego.velocity() - actor.velocity()).norm());
        }
    }
    None
}

/// Drive one scenario with the given controller. The observation window is
/// back-filled before t = 0 by extrapolating the ego backwards at its
/// initial velocity and evaluating the actor scripts at negative times.
fn simulate(
    scenario: &ScenarioSpec,
    window: usize,
    controller: &mut dyn Controller,
) -> Result<SimOutcome> {
    let dt = scenario.dt;
    let steps = (scenario.duration / dt).round() as usize;

    let mut frames: VecDeque<SceneState> = VecDeque::with_capacity(window);
    for k in (1..window).rev() {
        let t = -(k as f64) * dt;
        let ego = scenario.ego_init;
        let back = Vec2::from_heading(ego.heading) * (ego.speed * t);
        let past_ego = AgentState {
            x: ego.x + back.x,
            y: ego.y + back.y,
            ..ego
        };
        frames.push_back(SceneState::new(t, past_ego, scenario.actor_states_at(t)));
    }
    let mut state = SceneState::new(0.0, scenario.ego_init, scenario.actor_states_at(0.0));
    frames.push_back(state.clone());

    let mut trace = vec![TraceSample::of(&state)];
    if let Some(impact) = first_contact(&state) {
        return Ok(SimOutcome {
            collided: true,
            impact_speed: Some(impact),
            collision_time: Some(0.0),
            trace,
        });
    }

    for _ in 0..steps {
        let history = ObservationHistory::new(frames.iter().cloned().collect())?;
        let (accel, yaw_rate) = controller.command(&state, &history)?;
        state = step_world(&state, &scenario.actors, accel, yaw_rate, dt)?.state;
        trace.push(TraceSample::of(&state));
        frames.pop_front();
        frames.push_back(state.clone());

        if let Some(impact) = first_contact(&state) {
            return Ok(SimOutcome {
                collided: true,
                impact_speed: Some(impact),
                collision_time: Some(state.time),
                trace,
            });
        }
    }

    Ok(SimOutcome {
        collided: false,
        impact_speed: None,
        collision_time: None,
        trace,
    })
}

/// Run a scenario closed-loop with explicit agent and imaginer instances
/// (e.g. scripted doubles). Obtains the reference impact speed first, per
/// the scenario's mode; a simulated baseline that never collides rejects
/// the scenario.
pub fn run_closed_loop_with(
    scenario: &ScenarioSpec,
    mode: Mode,
    agent: &mut dyn DrivingAgent,
    imaginer: &mut dyn SceneImaginer,
    loop_config: &LoopConfig,
    replan_hz: f64,
) -> Result<ClosedLoopOutcome> {
    scenario.validate()?;
    if !(replan_hz > 0.0) {
        return Err(Error::config("replan_hz must be positive"));
    }

    let reference_speed = match scenario.reference_impact_speed {
        RefSpeedMode::Explicit(v) => v,
        RefSpeedMode::SimulatedNoAction => {
            let baseline = simulate(scenario, loop_config.window_length, &mut NoAction)?;
            match baseline.impact_speed {
                Some(v) if v > 1e-9 => v,
                Some(_) => {
                    return Err(Error::ScenarioInvalid {
                        id: scenario.id.clone(),
                        reason: "no-action baseline impact speed is zero".into(),
                    })
                }
                None => {
                    return Err(Error::ScenarioInvalid {
                        id: scenario.id.clone(),
                        reason: "no-action baseline never collides".into(),
                    })
                }
            }
        }
    };

    let mut config = loop_config.clone();
    config.agent_only = mode == Mode::AgentOnly;
    let mut controller = PolicyController {
        agent,
        imaginer,
        config: config.clone(),
        replan_interval: 1.0 / replan_hz,
        next_replan: 0.0,
        path: None,
        stats: Vec::new(),
    };
    let sim = simulate(scenario, config.window_length, &mut controller)?;

    Ok(ClosedLoopOutcome {
        scenario_id: scenario.id.clone(),
        category: scenario.category,
        mode,
        collided: sim.collided,
        impact_speed: sim.impact_speed,
        reference_speed: Some(reference_speed),
        collision_time: sim.collision_time,
        ego_trace: sim.trace,
        per_step_loop_stats: controller.stats,
    })
}

/// Run a scenario closed-loop with the built-in lattice planner and
/// constant-velocity imaginer. `seed` drives the imaginer noise.
pub fn run_closed_loop(
    scenario: &ScenarioSpec,
    mode: Mode,
    loop_config: &LoopConfig,
    replan_hz: f64,
    noise_std: f64,
    seed: u64,
) -> Result<ClosedLoopOutcome> {
    let mut agent = ToyPlanner::new(scenario.goal_vec());
    let mut imaginer = ToyImaginer::new(noise_std, seed);
    run_closed_loop_with(scenario, mode, &mut agent, &mut imaginer, loop_config, replan_hz)
}
