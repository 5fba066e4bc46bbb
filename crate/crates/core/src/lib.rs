//! Recurrent plan-imagine-refine trajectory planning.
//!
//! The crate is organized around a small loop: a [`DrivingAgent`] proposes a
//! trajectory, a [`SceneImaginer`] rolls the scene forward along it, and the
//! agent refines its plan from the imagined key frames. A trajectory buffer
//! collects every iterate; a convergence ratio decides when to stop early and
//! a selection strategy picks the final trajectory from the buffer.
//!
//! The `world` module provides a deterministic kinematic driving world
//! (scripted scenarios, a lattice planner, a constant-velocity imaginer and a
//! closed-loop simulator) so the loop runs end-to-end without any learned
//! components. The `metrics` module implements the closed-loop safety score,
//! the PDM aggregation, and open-loop L2 / collision-rate evaluation.

pub mod engine;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod select;
pub mod testing;
pub mod trajectory;
pub mod world;

pub use engine::{
    extract_keyframes, run_loop, should_stop, DrivingAgent, ImaginedSequence, LoopConfig,
    LoopResult, ObservationHistory, SceneImaginer, TrajectoryBuffer,
};
pub use error::{Error, Result};
pub use select::{select, Selection, SelectorKind, SelectorOptions};
pub use trajectory::{
    avg_direction, mean_direction, smooth_l1, tcr, DirectionVector, Trajectory, Waypoint,
};
pub use world::{AgentState, SceneState};
