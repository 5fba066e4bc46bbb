//! Sampling lattice planner: enumerates constant (acceleration, yaw-rate)
//! command pairs rolled out on the waypoint grid, scores each candidate by
//! goal progress, comfort and collision risk, and returns the best one.
//!
//! Risk is scored against the current-frame actors at every waypoint
//! (static hazards) and, when imagined key frames are supplied, against the
//! key-frame actor positions at the time-aligned waypoint only.

use super::{AgentState, SceneState};
use crate::engine::DrivingAgent;
use crate::error::Result;
use crate::geometry::{wrap_angle, OrientedRect, Vec2};
use crate::trajectory::{Trajectory, Waypoint};
use serde::{Deserialize, Serialize};

/// Lattice and scoring knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Candidate accelerations, m/s^2.
    pub accels: Vec<f64>,
    /// Candidate yaw rates, rad/s.
    pub yaw_rates: Vec<f64>,
    /// Planning horizon, seconds.
    pub horizon: f64,
    /// Waypoints per candidate.
    pub waypoint_count: usize,
    /// Integration step for the rollout, seconds.
    pub rollout_dt: f64,
    pub progress_weight: f64,
    pub comfort_weight: f64,
    pub risk_weight: f64,
    /// Risk charged for a predicted footprint overlap, per waypoint.
    pub overlap_penalty: f64,
    /// Clearance below which a soft proximity penalty applies, meters.
    pub clearance_margin: f64,
    /// Peak of the soft proximity penalty.
    pub proximity_penalty: f64,
    /// Safety margin added around the ego footprint when scoring risk,
    /// meters per side; absorbs tracking error.
    pub footprint_inflation: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            accels: vec![-6.0, -3.0, 0.0, 1.5, 3.0],
            yaw_rates: vec![-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6],
            horizon: 3.0,
            waypoint_count: 6,
            rollout_dt: 0.1,
            progress_weight: 1.0,
            comfort_weight: 0.1,
            risk_weight: 10.0,
            overlap_penalty: 5.0,
            clearance_margin: 1.5,
            proximity_penalty: 0.5,
            footprint_inflation: 0.3,
        }
    }
}

/// A rolled-out candidate: ego-frame waypoints plus the heading at each.
struct Candidate {
    accel: f64,
    waypoints: Vec<Waypoint>,
    headings: Vec<f64>,
}

fn rollout(accel: f64, yaw_rate: f64, speed: f64, cfg: &SamplerConfig) -> Candidate {
    let grid_dt = cfg.horizon / cfg.waypoint_count as f64;
    let steps_per_waypoint = (grid_dt / cfg.rollout_dt).round().max(1.0) as usize;

    let mut v = speed;
    let mut heading = 0.0;
    let mut pos = Vec2::ZERO;
    let mut waypoints = Vec::with_capacity(cfg.waypoint_count);
    let mut headings = Vec::with_capacity(cfg.waypoint_count);

    for k in 1..=cfg.waypoint_count {
        for _ in 0..steps_per_waypoint {
            v = (v + accel * cfg.rollout_dt).max(0.0);
            heading += yaw_rate * cfg.rollout_dt;
            pos = pos + Vec2::from_heading(heading) * (v * cfg.rollout_dt);
        }
        waypoints.push(Waypoint::new(grid_dt * k as f64, pos.x, pos.y));
        headings.push(heading);
    }

    Candidate {
        accel,
        waypoints,
        headings,
    }
}

/// A scored obstacle: footprint in the plan-time ego frame, plus the
/// waypoint time it applies to (`None` = applies at every waypoint).
struct Hazard {
    rect: OrientedRect,
    time: Option<f64>,
}

fn to_ego_frame(actor: &AgentState, ego: &AgentState) -> OrientedRect {
    let rel = (actor.pos() - ego.pos()).rotate(-ego.heading);
    OrientedRect::new(
        rel,
        wrap_angle(actor.heading - ego.heading),
        actor.length,
        actor.width,
    )
}

fn candidate_risk(candidate: &Candidate, hazards: &[Hazard], ego: &AgentState, cfg: &SamplerConfig) -> f64 {
    let grid_dt = cfg.horizon / cfg.waypoint_count as f64;
    let mut risk = 0.0;
    for (w, &heading) in candidate.waypoints.iter().zip(&candidate.headings) {
        let ego_rect = OrientedRect::new(
            w.pos(),
            heading,
            ego.length + 2.0 * cfg.footprint_inflation,
            ego.width + 2.0 * cfg.footprint_inflation,
        );
        for hazard in hazards {
            if let Some(t) = hazard.time {
                // Charge time-bound hazards only at the nearest waypoint.
                if (t - w.t).abs() > grid_dt * 0.5 + 1e-9 {
                    continue;
                }
            }
            let gap = ego_rect.separation_gap(&hazard.rect);
            if gap <= 0.0 {
                risk += cfg.overlap_penalty;
            } else if gap < cfg.clearance_margin {
                risk += cfg.proximity_penalty * (1.0 - gap / cfg.clearance_margin);
            }
        }
    }
    risk
}

/// Plan a trajectory toward `goal` (world frame). Always returns the best
/// scoring candidate, even if every candidate is at risk; ties break to the
/// lowest lattice index.
pub fn toy_plan(
    current: &SceneState,
    ego_speed: f64,
    goal: Vec2,
    imagined_keyframes: Option<&[SceneState]>,
    cfg: &SamplerConfig,
) -> Result<Trajectory> {
    let ego = &current.ego;
    let goal_ego = (goal - ego.pos()).rotate(-ego.heading);

    let mut hazards: Vec<Hazard> = current
        .actors
        .iter()
        .map(|a| Hazard {
            rect: to_ego_frame(a, ego),
            time: None,
        })
        .collect();
    if let Some(keyframes) = imagined_keyframes {
        for frame in keyframes {
            let offset = frame.time - current.time;
            for actor in &frame.actors {
                hazards.push(Hazard {
                    rect: to_ego_frame(actor, ego),
                    time: Some(offset),
                });
            }
        }
    }

    let mut best: Option<(f64, Candidate)> = None;
    for &accel in &cfg.accels {
        for &yaw_rate in &cfg.yaw_rates {
            let candidate = rollout(accel, yaw_rate, ego_speed, cfg);
            let end = candidate.waypoints.last().unwrap().pos();
            let progress = goal_ego.norm() - (goal_ego - end).norm();
            let risk = candidate_risk(&candidate, &hazards, ego, cfg);
            let score = cfg.progress_weight * progress
                - cfg.comfort_weight * candidate.accel.abs()
                - cfg.risk_weight * risk;
            if best.as_ref().map_or(true, |(s, _)| score > *s) {
                best = Some((score, candidate));
            }
        }
    }

    let (_, winner) = best.expect("lattice is non-empty");
    Trajectory::new(winner.waypoints)
}

/// [`DrivingAgent`] backed by [`toy_plan`] with a fixed goal.
#[derive(Debug, Clone)]
pub struct ToyPlanner {
    pub goal: Vec2,
    pub config: SamplerConfig,
}

impl ToyPlanner {
    pub fn new(goal: Vec2) -> Self {
        ToyPlanner {
            goal,
            config: SamplerConfig::default(),
        }
    }
}

impl DrivingAgent for ToyPlanner {
    fn plan(
        &mut self,
        current: &SceneState,
        ego_speed: f64,
        imagined_keyframes: Option<&[SceneState]>,
    ) -> Result<Trajectory> {
        toy_plan(current, ego_speed, self.goal, imagined_keyframes, &self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::check_collision;

    fn scene_with(actors: Vec<AgentState>) -> SceneState {
        SceneState::new(0.0, AgentState::car(0.0, 0.0, 0.0, 8.0), actors)
    }

    fn goal() -> Vec2 {
        Vec2::new(80.0, 0.0)
    }

    #[test]
    fn empty_road_goes_straight_at_speed() {
        let scene = scene_with(vec![]);
        let t = toy_plan(&scene, 8.0, goal(), None, &SamplerConfig::default()).unwrap();
        // Max-progress candidate: highest acceleration, zero yaw.
        let last = t.waypoints().last().unwrap();
        assert!(last.y.abs() < 1e-9, "should not turn: {}", last.y);
        assert!(last.x > 8.0 * 3.0, "should accelerate: {}", last.x);
    }

    #[test]
    fn stationary_obstacle_forces_brake_or_swerve() {
        // In-lane car 8 m ahead at 8 m/s: constant speed runs straight
        // through it, so a braking or lane-offset candidate must win.
        let obstacle = AgentState::car(8.0, 0.0, 0.0, 0.0);
        let scene = scene_with(vec![obstacle]);
        let t = toy_plan(&scene, 8.0, goal(), None, &SamplerConfig::default()).unwrap();
        let last = t.waypoints().last().unwrap();
        let swerved = last.y.abs() > 1.0;
        let braked = last.x < 0.8 * 8.0 * 3.0;
        assert!(swerved || braked, "plan ends at ({}, {})", last.x, last.y);
        let free = toy_plan(&scene_with(vec![]), 8.0, goal(), None, &SamplerConfig::default())
            .unwrap();
        assert_ne!(t, free);
    }

    #[test]
    fn keyframes_reveal_crossing_conflict() {
        // Crossing actor: at t=0 far below the lane, at 1.0 s inside it.
        let crossing_now = AgentState::car(9.0, -8.0, std::f64::consts::FRAC_PI_2, 8.0);
        let scene = scene_with(vec![crossing_now]);
        let cfg = SamplerConfig::default();

        let blind = toy_plan(&scene, 8.0, goal(), None, &cfg).unwrap();
        // Without key frames the straight fast plan wins.
        assert!(blind.waypoints().last().unwrap().x > 20.0);

        let keyframe = |t: f64| {
            SceneState::new(
                t,
                AgentState::car(8.0 * t, 0.0, 0.0, 8.0),
                vec![AgentState::car(9.0, -8.0 + 8.0 * t, std::f64::consts::FRAC_PI_2, 8.0)],
            )
        };
        let frames = [keyframe(0.5), keyframe(1.0)];
        let informed = toy_plan(&scene, 8.0, goal(), Some(&frames), &cfg).unwrap();
        assert_ne!(informed, blind);
        // The informed plan stays clear of the 1.0 s conflict cell around x=9.
        let w_at_1s = informed.waypoints()[1];
        let conflict = AgentState::car(9.0, 0.0, std::f64::consts::FRAC_PI_2, 0.0);
        let ego_there = AgentState::car(w_at_1s.x, w_at_1s.y, 0.0, 0.0);
        assert!(!check_collision(&ego_there, &conflict));
    }

    #[test]
    fn adding_an_actor_never_improves_risk() {
        let cfg = SamplerConfig::default();
        let ego = AgentState::car(0.0, 0.0, 0.0, 8.0);
        let candidate = rollout(0.0, 0.1, 8.0, &cfg);
        let base_hazards: Vec<Hazard> = vec![];
        let base = candidate_risk(&candidate, &base_hazards, &ego, &cfg);
        for x in [2.0, 6.0, 12.0, 30.0] {
            let hazards = vec![Hazard {
                rect: to_ego_frame(&AgentState::car(x, 0.5, 0.0, 0.0), &ego),
                time: None,
            }];
            let with_actor = candidate_risk(&candidate, &hazards, &ego, &cfg);
            assert!(with_actor >= base);
        }
    }

    #[test]
    fn deterministic_for_identical_inputs() {
        let scene = scene_with(vec![AgentState::car(15.0, 1.0, 0.2, 3.0)]);
        let a = toy_plan(&scene, 8.0, goal(), None, &SamplerConfig::default()).unwrap();
        let b = toy_plan(&scene, 8.0, goal(), None, &SamplerConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
