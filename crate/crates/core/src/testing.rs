//! Deterministic agent and imaginer doubles for exercising the loop
//! protocol, plus small scene builders. These are part of the test-suite
//! contract: every loop path can be replayed exactly.

use crate::engine::{DrivingAgent, ImaginedSequence, ObservationHistory, SceneImaginer};
use crate::error::{Error, Result};
use crate::trajectory::{Trajectory, Waypoint};
use crate::world::{AgentState, SceneState};

/// An agent that replays a fixed list of trajectories, repeating the last
/// one once the list is exhausted. Counts its calls.
pub struct ScriptedAgent {
    outputs: Vec<Trajectory>,
    pub calls: usize,
}

impl ScriptedAgent {
    pub fn new(outputs: Vec<Trajectory>) -> Self {
        ScriptedAgent { outputs, calls: 0 }
    }

    /// Always returns the same trajectory.
    pub fn constant(trajectory: Trajectory) -> Self {
        ScriptedAgent::new(vec![trajectory])
    }

    /// Fails on every call; for error-propagation tests.
    pub fn failing() -> Self {
        ScriptedAgent::new(vec![])
    }
}

impl DrivingAgent for ScriptedAgent {
    fn plan(
        &mut self,
        _current: &SceneState,
        _ego_speed: f64,
        _imagined_keyframes: Option<&[SceneState]>,
    ) -> Result<Trajectory> {
        let call = self.calls;
        self.calls += 1;
        if self.outputs.is_empty() {
            return Err(Error::invalid_input("scripted agent has no outputs"));
        }
        let idx = call.min(self.outputs.len() - 1);
        Ok(self.outputs[idx].clone())
    }
}

/// An agent whose lateral perturbation halves on every call: call `k`
/// returns the base trajectory shifted by `delta / 2^k` in y. Useful for
/// exercising the early-stop threshold with a closed-form iterate sequence.
pub struct HalvingAgent {
    pub base: Trajectory,
    pub delta: f64,
    pub calls: usize,
}

impl HalvingAgent {
    pub fn new(base: Trajectory, delta: f64) -> Self {
        HalvingAgent {
            base,
            delta,
            calls: 0,
        }
    }

    /// The trajectory this agent returns on call `k`, without mutating it.
    pub fn output_for_call(&self, k: usize) -> Trajectory {
        let offset = self.delta * 0.5_f64.powi(k as i32);
        let waypoints = self
            .base
            .waypoints()
            .iter()
            .map(|w| Waypoint::new(w.t, w.x, w.y + offset))
            .collect();
        Trajectory::new(waypoints).unwrap()
    }
}

impl DrivingAgent for HalvingAgent {
    fn plan(
        &mut self,
        _current: &SceneState,
        _ego_speed: f64,
        _imagined_keyframes: Option<&[SceneState]>,
    ) -> Result<Trajectory> {
        let out = self.output_for_call(self.calls);
        self.calls += 1;
        Ok(out)
    }
}

/// An imaginer that replays the current frame forward: every imagined frame
/// copies the current scene with an advanced timestamp. Counts its calls.
pub struct ReplayImaginer {
    pub frame_count: usize,
    pub frame_hz: f64,
    pub calls: usize,
}

impl ReplayImaginer {
    pub fn new(frame_count: usize, frame_hz: f64) -> Self {
        ReplayImaginer {
            frame_count,
            frame_hz,
            calls: 0,
        }
    }
}

impl Default for ReplayImaginer {
    fn default() -> Self {
        ReplayImaginer::new(25, 10.0)
    }
}

impl SceneImaginer for ReplayImaginer {
    fn imagine(
        &mut self,
        history: &ObservationHistory,
        _conditioning: &Trajectory,
    ) -> Result<ImaginedSequence> {
        self.calls += 1;
        let current = history.current();
        let frames = (1..=self.frame_count)
            .map(|k| {
                let mut frame = current.clone();
                frame.time = current.time + k as f64 / self.frame_hz;
                frame
            })
            .collect();
        ImaginedSequence::new(current.time, frames)
    }
}

/// An imaginer that fails on every call.
pub struct FailingImaginer;

impl SceneImaginer for FailingImaginer {
    fn imagine(
        &mut self,
        _history: &ObservationHistory,
        _conditioning: &Trajectory,
    ) -> Result<ImaginedSequence> {
        Err(Error::invalid_input("failing imaginer"))
    }
}

/// An empty scene at the given time with the ego cruising along +x.
pub fn still_scene(time: f64) -> SceneState {
    SceneState::new(time, AgentState::car(0.0, 0.0, 0.0, 8.0), vec![])
}

/// A window of `n` frames at `dt` spacing ending at t = 0, ego moving at a
/// constant 8 m/s along +x.
pub fn history_of(n: usize, dt: f64) -> ObservationHistory {
    let frames = (0..n)
        .map(|i| {
            let t = -((n - 1 - i) as f64) * dt;
            SceneState::new(t, AgentState::car(8.0 * t, 0.0, 0.0, 8.0), vec![])
        })
        .collect();
    ObservationHistory::new(frames).unwrap()
}

/// A straight constant-speed trajectory on the default grid.
pub fn straight_trajectory(speed: f64, n: usize) -> Trajectory {
    let points: Vec<(f64, f64)> = (1..=n).map(|i| (speed * 0.5 * i as f64, 0.0)).collect();
    Trajectory::on_grid(0.5, &points).unwrap()
}
