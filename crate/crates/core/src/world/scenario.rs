//! Scripted scenario specifications: ego start, goal, actor schedules,
//! duration, and how the reference impact speed is obtained.

use super::AgentState;
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Scenario taxonomy of the closed-loop benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Stationary,
    Frontal,
    Side,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Stationary, Category::Frontal, Category::Side];

    pub fn name(&self) -> &'static str {
        match self {
            Category::Stationary => "stationary",
            Category::Frontal => "frontal",
            Category::Side => "side",
        }
    }
}

/// A position an actor passes through at a given scenario time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// How a scripted actor moves. All motions are closed-form in time, so
/// actor states never accumulate integration error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActorMotion {
    /// Hold the initial heading and speed forever (speed 0 = parked).
    ConstantVelocity,
    /// Piecewise-linear waypoint schedule. Before the first point the actor
    /// back-extrapolates along the first segment; after the last point it
    /// holds position.
    Waypoints { points: Vec<TimedPoint> },
}

/// A scripted actor: initial state plus its motion law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorSpec {
    pub init: AgentState,
    pub motion: ActorMotion,
}

impl ActorSpec {
    pub fn constant_velocity(init: AgentState) -> Self {
        ActorSpec {
            init,
            motion: ActorMotion::ConstantVelocity,
        }
    }

    /// Scripted state at scenario time `t` (may be negative for history
    /// back-fill).
    pub fn state_at(&self, t: f64) -> AgentState {
        match &self.motion {
            ActorMotion::ConstantVelocity => {
                let pos = self.init.pos() + self.init.velocity() * t;
                AgentState {
                    x: pos.x,
                    y: pos.y,
                    ..self.init
                }
            }
            ActorMotion::Waypoints { points } => self.schedule_state_at(points, t),
        }
    }

    fn schedule_state_at(&self, points: &[TimedPoint], t: f64) -> AgentState {
        if points.is_empty() {
            return self.init;
        }
        if points.len() == 1 {
            return AgentState {
                x: points[0].x,
                y: points[0].y,
                speed: 0.0,
                ..self.init
            };
        }
        let segment = |a: &TimedPoint, b: &TimedPoint, t: f64| -> AgentState {
            let span = b.t - a.t;
            let v = Vec2::new((b.x - a.x) / span, (b.y - a.y) / span);
            let pos = Vec2::new(a.x, a.y) + v * (t - a.t);
            let speed = v.norm();
            let heading = if speed > 1e-9 {
                wrap_angle(v.y.atan2(v.x))
            } else {
                self.init.heading
            };
            AgentState {
                x: pos.x,
                y: pos.y,
                heading,
                speed,
                ..self.init
            }
        };
        if t <= points[0].t {
            return segment(&points[0], &points[1], t);
        }
        for pair in points.windows(2) {
            if t <= pair[1].t {
                return segment(&pair[0], &pair[1], t);
            }
        }
        // Past the schedule: hold the final position.
        let last = points.last().unwrap();
        let prev = &points[points.len() - 2];
        let mut held = segment(prev, last, last.t);
        held.speed = 0.0;
        held.x = last.x;
        held.y = last.y;
        held
    }
}

/// How the reference impact speed (the NNS denominator) is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefSpeedMode {
    /// Rerun the scenario with a constant-velocity ego and record the
    /// contact speed; scenarios whose baseline never collides are invalid.
    SimulatedNoAction,
    /// Use a hand-authored value.
    Explicit(f64),
}

/// A full scripted scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub category: Category,
    pub ego_init: AgentState,
    /// World-frame goal the planner drives toward.
    pub goal: [f64; 2],
    pub actors: Vec<ActorSpec>,
    /// Seconds of simulated time.
    pub duration: f64,
    /// Simulation step, seconds.
    pub dt: f64,
    pub reference_impact_speed: RefSpeedMode,
}

impl ScenarioSpec {
    pub fn goal_vec(&self) -> Vec2 {
        Vec2::new(self.goal[0], self.goal[1])
    }

    /// All scripted actor states at scenario time `t`.
    pub fn actor_states_at(&self, t: f64) -> Vec<AgentState> {
        self.actors.iter().map(|a| a.state_at(t)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid_input("scenario id must be non-empty"));
        }
        if !(self.duration > 0.0) || !(self.dt > 0.0) {
            return Err(Error::invalid_input(format!(
                "scenario `{}`: duration and dt must be positive",
                self.id
            )));
        }
        self.ego_init.validate()?;
        if !self.goal[0].is_finite() || !self.goal[1].is_finite() {
            return Err(Error::invalid_input(format!(
                "scenario `{}`: goal must be finite",
                self.id
            )));
        }
        for (i, actor) in self.actors.iter().enumerate() {
            actor.init.validate()?;
            if let ActorMotion::Waypoints { points } = &actor.motion {
                for pair in points.windows(2) {
                    if pair[1].t <= pair[0].t {
                        return Err(Error::invalid_input(format!(
                            "scenario `{}`: actor {i} schedule times must strictly increase",
                            self.id
                        )));
                    }
                }
            }
        }
        if let RefSpeedMode::Explicit(v) = self.reference_impact_speed {
            if !(v > 0.0) {
                return Err(Error::invalid_input(format!(
                    "scenario `{}`: explicit reference speed must be positive",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(json)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_velocity_closed_form() {
        let actor = ActorSpec::constant_velocity(AgentState::car(20.0, 0.0, std::f64::consts::PI, 5.0));
        let s = actor.state_at(0.5);
        assert!((s.x - 17.5).abs() < 1e-12);
        assert!(s.y.abs() < 1e-9);
        let s = actor.state_at(1.0);
        assert!((s.x - 15.0).abs() < 1e-12);
    }

    #[test]
    fn parked_actor_stays_put() {
        let actor = ActorSpec::constant_velocity(AgentState::car(12.0, 3.0, 0.0, 0.0));
        for t in [-1.0, 0.0, 2.5, 10.0] {
            let s = actor.state_at(t);
            assert_eq!((s.x, s.y), (12.0, 3.0));
        }
    }

    #[test]
    fn schedule_interpolates_and_holds() {
        let actor = ActorSpec {
            init: AgentState::car(0.0, 0.0, 0.0, 0.0),
            motion: ActorMotion::Waypoints {
                points: vec![
                    TimedPoint { t: 0.0, x: 10.0, y: 4.0 },
                    TimedPoint { t: 2.0, x: 10.0, y: 0.0 },
                ],
            },
        };
        let mid = actor.state_at(1.0);
        assert!((mid.y - 2.0).abs() < 1e-12);
        assert!((mid.speed - 2.0).abs() < 1e-12);
        // Before the schedule: back-extrapolate along the first segment.
        let before = actor.state_at(-0.5);
        assert!((before.y - 5.0).abs() < 1e-12);
        // After: hold the last position with zero speed.
        let after = actor.state_at(5.0);
        assert_eq!((after.x, after.y), (10.0, 0.0));
        assert_eq!(after.speed, 0.0);
    }

    #[test]
    fn json_round_trip_validates() {
        let spec = ScenarioSpec {
            id: "t".into(),
            category: Category::Side,
            ego_init: AgentState::car(0.0, 0.0, 0.0, 8.0),
            goal: [80.0, 0.0],
            actors: vec![ActorSpec::constant_velocity(AgentState::car(
                10.0,
                -8.0,
                std::f64::consts::FRAC_PI_2,
                6.0,
            ))],
            duration: 8.0,
            dt: 0.1,
            reference_impact_speed: RefSpeedMode::SimulatedNoAction,
        };
        let json = spec.to_json().unwrap();
        let back = ScenarioSpec::from_json(&json).unwrap();
        assert_eq!(back, spec);

        let mut bad = spec;
        bad.duration = 0.0;
        assert!(ScenarioSpec::from_json(&bad.to_json().unwrap()).is_err());
    }
}
