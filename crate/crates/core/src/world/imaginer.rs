//! State-space scene imaginer: rolls the ego exactly along the conditioning
//! trajectory and extrapolates actors at the velocity estimated from the
//! observation window, with optional seeded Gaussian position noise
//! standing in for generation artifacts.

use super::{AgentState, SceneState};
use crate::engine::{ImaginedSequence, ObservationHistory, SceneImaginer};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};
use crate::trajectory::{Trajectory, DEGENERACY_FLOOR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Default number of imagined frames.
pub const DEFAULT_FRAME_COUNT: usize = 25;
/// Default imagined frame rate, Hz.
pub const DEFAULT_FRAME_HZ: f64 = 10.0;

/// Mix a base seed with the plan-time bits so the noise draw is a pure
/// function of the call inputs (splitmix64 finalizer).
fn mix_seed(seed: u64, bits: u64) -> u64 {
    let mut z = seed ^ bits.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Imagine `frame_count` frames at `frame_hz`: the ego follows
/// `conditioning` (linearly interpolated, transformed to the world frame at
/// plan time); each actor extrapolates at the average velocity observed
/// across the history window; `noise_std` > 0 adds seeded Gaussian noise to
/// actor positions.
pub fn toy_imagine(
    history: &ObservationHistory,
    conditioning: &Trajectory,
    noise_std: f64,
    seed: u64,
    frame_count: usize,
    frame_hz: f64,
) -> Result<ImaginedSequence> {
    if history.is_empty() {
        return Err(Error::invalid_input("toy_imagine: empty history"));
    }
    if frame_count == 0 || !(frame_hz > 0.0) {
        return Err(Error::config("toy_imagine: bad frame count or rate"));
    }
    if noise_std < 0.0 {
        return Err(Error::config("toy_imagine: noise_std must be >= 0"));
    }

    let current = history.current();
    let first = history.frames().first().unwrap();
    let plan_time = current.time;
    let ego_pos = current.ego.pos();
    let ego_heading = current.ego.heading;

    if first.actors.len() != current.actors.len() {
        return Err(Error::invalid_input(
            "toy_imagine: actor count varies across the history window",
        ));
    }

    // Average velocity per actor across the window; falls back to the
    // actor's instantaneous velocity for single-frame windows.
    let span = current.time - first.time;
    let actor_velocities: Vec<Vec2> = current
        .actors
        .iter()
        .enumerate()
        .map(|(i, actor)| {
            if span > 1e-9 {
                (actor.pos() - first.actors[i].pos()) * (1.0 / span)
            } else {
                actor.velocity()
            }
        })
        .collect();

    let mut rng = (noise_std > 0.0)
        .then(|| ChaCha8Rng::seed_from_u64(mix_seed(seed, plan_time.to_bits())));
    let normal = Normal::new(0.0, noise_std)
        .map_err(|_| Error::config("toy_imagine: invalid noise_std"))?;

    let dt = 1.0 / frame_hz;
    let mut frames = Vec::with_capacity(frame_count);
    for k in 1..=frame_count {
        let offset = k as f64 * dt;

        // Ego: position on the conditioning path, heading from the local
        // tangent, speed from the displacement over one frame interval.
        let local = conditioning.position_at(offset);
        let local_prev = conditioning.position_at(offset - dt);
        let tangent = local - local_prev;
        let world = ego_pos + local.rotate(ego_heading);
        let speed = tangent.norm() / dt;
        let heading = if tangent.norm() > DEGENERACY_FLOOR {
            wrap_angle(ego_heading + tangent.y.atan2(tangent.x))
        } else {
            ego_heading
        };
        let ego = AgentState {
            x: world.x,
            y: world.y,
            heading,
            speed,
            ..current.ego
        };

        let actors: Vec<AgentState> = current
            .actors
            .iter()
            .zip(&actor_velocities)
            .map(|(actor, &v)| {
                let mut pos = actor.pos() + v * offset;
                if let Some(rng) = rng.as_mut() {
                    pos.x += normal.sample(rng);
                    pos.y += normal.sample(rng);
                }
                let speed = v.norm();
                let heading = if speed > DEGENERACY_FLOOR {
                    wrap_angle(v.y.atan2(v.x))
                } else {
                    actor.heading
                };
                AgentState {
                    x: pos.x,
                    y: pos.y,
                    heading,
                    speed,
                    ..*actor
                }
            })
            .collect();

        frames.push(SceneState::new(plan_time + offset, ego, actors));
    }

    ImaginedSequence::new(plan_time, frames)
}

/// [`SceneImaginer`] backed by [`toy_imagine`].
#[derive(Debug, Clone)]
pub struct ToyImaginer {
    pub noise_std: f64,
    pub seed: u64,
    pub frame_count: usize,
    pub frame_hz: f64,
}

impl ToyImaginer {
    pub fn new(noise_std: f64, seed: u64) -> Self {
        ToyImaginer {
            noise_std,
            seed,
            frame_count: DEFAULT_FRAME_COUNT,
            frame_hz: DEFAULT_FRAME_HZ,
        }
    }
}

impl SceneImaginer for ToyImaginer {
    fn imagine(
        &mut self,
        history: &ObservationHistory,
        conditioning: &Trajectory,
    ) -> Result<ImaginedSequence> {
        toy_imagine(
            history,
            conditioning,
            self.noise_std,
            self.seed,
            self.frame_count,
            self.frame_hz,
        )
    }
}
