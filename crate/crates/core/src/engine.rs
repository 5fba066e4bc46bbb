//! The recurrent plan-imagine-refine loop.
//!
//! An initial plan conditions the imaginer; key frames extracted from the
//! imagined sequence feed the next planning call. Every iterate lands in an
//! append-only trajectory buffer. With early stopping enabled the loop
//! terminates once the convergence ratio between the newest iterate and any
//! earlier one drops below a threshold; with selection enabled the final
//! trajectory is picked from the whole buffer by the configured strategy.

use crate::error::{Error, Result};
use crate::select::{select, Selection, SelectorKind, SelectorOptions};
use crate::trajectory::{tcr, DirectionVector, Trajectory, DEFAULT_EPSILON};
use crate::world::SceneState;
use serde::{Deserialize, Serialize};

/// Plans a trajectory from the current scene, optionally refining from
/// imagined future key frames. Implementations must be deterministic for
/// identical inputs, call order and seed.
pub trait DrivingAgent {
    fn plan(
        &mut self,
        current: &SceneState,
        ego_speed: f64,
        imagined_keyframes: Option<&[SceneState]>,
    ) -> Result<Trajectory>;
}

/// Rolls the scene forward along a conditioning trajectory, producing a
/// timestamped sequence of future frames.
pub trait SceneImaginer {
    fn imagine(
        &mut self,
        history: &ObservationHistory,
        conditioning: &Trajectory,
    ) -> Result<ImaginedSequence>;
}

/// The conditioning window: the preceding frames plus the current frame,
/// ordered by strictly increasing timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationHistory {
    frames: Vec<SceneState>,
}

impl ObservationHistory {
    pub fn new(frames: Vec<SceneState>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::invalid_input("observation history must be non-empty"));
        }
        for pair in frames.windows(2) {
            if pair[1].time <= pair[0].time {
                return Err(Error::invalid_input(
                    "observation history timestamps must strictly increase",
                ));
            }
        }
        Ok(ObservationHistory { frames })
    }

    pub fn frames(&self) -> &[SceneState] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// The newest frame; planning happens at its timestamp.
    pub fn current(&self) -> &SceneState {
        self.frames.last().unwrap()
    }

    /// Unit direction of the ego displacement across the window, degenerate
    /// when the ego has not moved.
    pub fn ego_motion_direction(&self) -> DirectionVector {
        let first = self.frames.first().unwrap();
        let last = self.current();
        DirectionVector::from_vec_normalized(last.ego.pos() - first.ego.pos())
    }
}

/// A sequence of imagined future frames, timestamps strictly increasing and
/// strictly after plan time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImaginedSequence {
    plan_time: f64,
    frames: Vec<SceneState>,
}

impl ImaginedSequence {
    pub fn new(plan_time: f64, frames: Vec<SceneState>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::invalid_input("imagined sequence must be non-empty"));
        }
        let mut prev = plan_time;
        for f in &frames {
            if f.time <= prev {
                return Err(Error::invalid_input(
                    "imagined frame timestamps must strictly increase after plan time",
                ));
            }
            prev = f.time;
        }
        Ok(ImaginedSequence { plan_time, frames })
    }

    pub fn plan_time(&self) -> f64 {
        self.plan_time
    }

    pub fn frames(&self) -> &[SceneState] {
        &self.frames
    }

    /// Offset of the last frame from plan time.
    pub fn horizon(&self) -> f64 {
        self.frames.last().unwrap().time - self.plan_time
    }
}

/// Extract one frame per requested offset (seconds after plan time): the
/// frame with the nearest timestamp, ties resolved to the earlier frame.
/// An offset beyond the imagined horizon is a configuration error.
pub fn extract_keyframes(seq: &ImaginedSequence, offsets: &[f64]) -> Result<Vec<SceneState>> {
    let mut keyframes = Vec::with_capacity(offsets.len());
    for &offset in offsets {
        if offset > seq.horizon() + 1e-9 {
            return Err(Error::config(format!(
                "keyframe offset {offset} s beyond imagined horizon {} s",
                seq.horizon()
            )));
        }
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, f) in seq.frames().iter().enumerate() {
            let dist = ((f.time - seq.plan_time) - offset).abs();
            if dist < best_dist {
                best_dist = dist;
                best = i;
            }
        }
        keyframes.push(seq.frames()[best].clone());
    }
    Ok(keyframes)
}

/// One buffer entry: the refinement iteration that produced the trajectory
/// (0 = the initial plan).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferEntry {
    pub iteration: usize,
    pub trajectory: Trajectory,
}

/// Append-only store of every trajectory produced in one loop run; the
/// selection pool.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBuffer {
    entries: Vec<BufferEntry>,
}

impl TrajectoryBuffer {
    pub fn new() -> Self {
        TrajectoryBuffer::default()
    }

    pub fn push(&mut self, trajectory: Trajectory) {
        let iteration = self.entries.len();
        self.entries.push(BufferEntry {
            iteration,
            trajectory,
        });
    }

    pub fn entries(&self) -> &[BufferEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, iteration: usize) -> Option<&Trajectory> {
        self.entries.get(iteration).map(|e| &e.trajectory)
    }

    pub fn latest(&self) -> Option<&Trajectory> {
        self.entries.last().map(|e| &e.trajectory)
    }

    pub fn trajectories(&self) -> Vec<Trajectory> {
        self.entries.iter().map(|e| e.trajectory.clone()).collect()
    }
}

/// Early-stop check: the convergence ratio between the newest buffer entry
/// and every earlier one; stop when the minimum drops below `theta`.
/// Returns the decision together with that minimum.
pub fn should_stop(buffer: &TrajectoryBuffer, theta: f64, epsilon: f64) -> Result<(bool, f64)> {
    if buffer.len() < 2 {
        return Err(Error::invalid_input(
            "should_stop: buffer needs at least 2 entries",
        ));
    }
    let latest = buffer.latest().unwrap();
    let mut min_tcr = f64::INFINITY;
    for entry in &buffer.entries[..buffer.len() - 1] {
        let value = tcr(latest, &entry.trajectory, epsilon)?;
        min_tcr = min_tcr.min(value);
    }
    Ok((min_tcr < theta, min_tcr))
}

/// Loop configuration. Defaults: stop threshold 0.05, five refinements,
/// key frames at 0.5 s and 1.0 s, a four-frame conditioning window, and
/// directional selection with both strategies enabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Early-stop threshold on the convergence ratio.
    pub theta: f64,
    /// Maximum refinement rounds after the initial plan.
    pub max_refinements: usize,
    pub epsilon: f64,
    /// Seconds after plan time at which key frames are extracted.
    pub keyframe_offsets: Vec<f64>,
    /// Frames in the conditioning window (preceding frames + current).
    pub window_length: usize,
    pub selector: SelectorKind,
    /// Temperature for the soft-min selector.
    pub softmin_tau: f64,
    /// Early-stop strategy on/off.
    pub ess_enabled: bool,
    /// Trajectory-selection strategy on/off (off = take the last iterate).
    pub tss_enabled: bool,
    /// Plan from the current frame only; the imaginer is never invoked.
    pub agent_only: bool,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            theta: 0.05,
            max_refinements: 5,
            epsilon: DEFAULT_EPSILON,
            keyframe_offsets: vec![0.5, 1.0],
            window_length: 4,
            selector: SelectorKind::Directional,
            softmin_tau: 1.0,
            ess_enabled: true,
            tss_enabled: true,
            agent_only: false,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(Error::config("theta must be positive"));
        }
        if self.max_refinements < 1 {
            return Err(Error::config("max_refinements must be at least 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        if !(self.softmin_tau > 0.0) {
            return Err(Error::config("softmin_tau must be positive"));
        }
        if self.window_length < 1 {
            return Err(Error::config("window_length must be at least 1"));
        }
        if self.keyframe_offsets.iter().any(|&o| !(o > 0.0)) {
            return Err(Error::config("keyframe offsets must be positive"));
        }
        Ok(())
    }
}

/// Outcome of one loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopResult {
    pub selected: Trajectory,
    /// Buffer index of the selected (or, for soft-min, nearest) candidate.
    pub selected_index: usize,
    pub buffer: TrajectoryBuffer,
    pub refinements_used: usize,
    pub stopped_early: bool,
    /// Minimum convergence ratio at the last early-stop evaluation.
    pub stop_tcr: Option<f64>,
}

/// Run the plan-imagine-refine loop.
///
/// Protocol: the agent plans from the current frame; then for each
/// refinement round the imaginer rolls the scene forward along the newest
/// plan, key frames are extracted at the configured offsets, and the agent
/// replans with them. Every plan lands in the buffer. With early stopping
/// the loop breaks once [`should_stop`] fires; the final trajectory comes
/// from the configured selector over the whole buffer (or the last entry
/// when selection is disabled). With `agent_only` the loop is just the
/// initial plan.
pub fn run_loop(
    agent: &mut dyn DrivingAgent,
    imaginer: &mut dyn SceneImaginer,
    history: &ObservationHistory,
    ego_speed: f64,
    config: &LoopConfig,
) -> Result<LoopResult> {
    config.validate()?;
    if history.len() != config.window_length {
        return Err(Error::config(format!(
            "observation history has {} frames, config expects {}",
            history.len(),
            config.window_length
        )));
    }
    let current = history.current();

    let mut buffer = TrajectoryBuffer::new();
    let initial = agent
        .plan(current, ego_speed, None)
        .map_err(|e| Error::AgentFailed {
            iteration: 0,
            source: Box::new(e),
        })?;
    buffer.push(initial);

    let mut refinements_used = 0;
    let mut stopped_early = false;
    let mut stop_tcr = None;

    if !config.agent_only {
        for iteration in 1..=config.max_refinements {
            let conditioning = buffer.latest().unwrap().clone();
            let sequence = imaginer
                .imagine(history, &conditioning)
                .map_err(|e| Error::ImaginerFailed {
                    iteration,
                    source: Box::new(e),
                })?;
            let keyframes = extract_keyframes(&sequence, &config.keyframe_offsets)?;
            let refined = agent
                .plan(current, ego_speed, Some(&keyframes))
                .map_err(|e| Error::AgentFailed {
                    iteration,
                    source: Box::new(e),
                })?;
            buffer.push(refined);
            refinements_used = iteration;

            if config.ess_enabled {
                let (stop, min_tcr) = should_stop(&buffer, config.theta, config.epsilon)?;
                stop_tcr = Some(min_tcr);
                if stop {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    let selection = if config.tss_enabled {
        let opts = SelectorOptions {
            epsilon: config.epsilon,
            tau: config.softmin_tau,
            heading: history.ego_motion_direction(),
        };
        select(config.selector, &buffer.trajectories(), &opts)?
    } else {
        Selection {
            index: buffer.len() - 1,
            trajectory: buffer.latest().unwrap().clone(),
        }
    };

    Ok(LoopResult {
        selected: selection.trajectory,
        selected_index: selection.index,
        buffer,
        refinements_used,
        stopped_early,
        stop_tcr,
    })
}
