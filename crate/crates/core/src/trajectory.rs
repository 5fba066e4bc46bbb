//! Waypoint/trajectory data model and the closed-form trajectory formulas:
//! the convergence ratio used for early stopping, per-trajectory direction
//! vectors, and the smooth-L1 waypoint error.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use serde::{Deserialize, Serialize};

/// Default number of waypoints per trajectory.
pub const DEFAULT_WAYPOINT_COUNT: usize = 6;
/// Default spacing of the waypoint timestamp grid, seconds.
pub const DEFAULT_WAYPOINT_DT: f64 = 0.5;
/// Default numerical-stability constant wherever a `+ eps` appears.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Vectors with a pre-normalization norm below this are treated as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-9;

/// A single 2D waypoint in the ego frame at plan time (x forward, y left),
/// timestamped as a positive offset from plan time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    /// Seconds after plan time.
    pub t: f64,
    /// Meters, longitudinal.
    pub x: f64,
    /// Meters, lateral.
    pub y: f64,
}

impl Waypoint {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Waypoint { t, x, y }
    }

    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// An ordered sequence of waypoints on a strictly increasing timestamp grid.
///
/// Serializes as a plain JSON array of `{"t": .., "x": .., "y": ..}` objects;
/// deserialization re-validates the invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Waypoint>")]
#[serde(into = "Vec<Waypoint>")]
pub struct Trajectory {
    waypoints: Vec<Waypoint>,
}

impl TryFrom<Vec<Waypoint>> for Trajectory {
    type Error = Error;
    fn try_from(waypoints: Vec<Waypoint>) -> Result<Self> {
        Trajectory::new(waypoints)
    }
}

impl From<Trajectory> for Vec<Waypoint> {
    fn from(t: Trajectory) -> Self {
        t.waypoints
    }
}

impl Trajectory {
    /// Build a trajectory, validating the waypoint invariants: at least two
    /// waypoints, finite coordinates, timestamps positive and strictly
    /// increasing.
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::invalid_input(format!(
                "trajectory needs >= 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        let mut prev_t = 0.0;
        for (i, w) in waypoints.iter().enumerate() {
            if !w.t.is_finite() || !w.x.is_finite() || !w.y.is_finite() {
                return Err(Error::invalid_input(format!(
                    "waypoint {i} has non-finite fields"
                )));
            }
            if w.t <= prev_t {
                return Err(Error::invalid_input(format!(
                    "waypoint {i} timestamp {} not strictly after {}",
                    w.t, prev_t
                )));
            }
            prev_t = w.t;
        }
        Ok(Trajectory { waypoints })
    }

    /// Build from `(x, y)` points on the default-style grid `dt, 2*dt, ...`.
    pub fn on_grid(dt: f64, points: &[(f64, f64)]) -> Result<Self> {
        let waypoints = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Waypoint::new(dt * (i + 1) as f64, x, y))
            .collect();
        Trajectory::new(waypoints)
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Timestamps of the grid.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.waypoints.iter().map(|w| w.t)
    }

    /// Position linearly interpolated at offset `t`, clamped to the ends
    /// (the first segment starts at the origin at t = 0).
    pub fn position_at(&self, t: f64) -> Vec2 {
        let first = &self.waypoints[0];
        if t <= 0.0 {
            return Vec2::ZERO;
        }
        if t <= first.t {
            return first.pos() * (t / first.t);
        }
        for pair in self.waypoints.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if t <= b.t {
                let alpha = (t - a.t) / (b.t - a.t);
                return a.pos() + (b.pos() - a.pos()) * alpha;
            }
        }
        self.waypoints.last().unwrap().pos()
    }

    /// Check that `other` shares this trajectory's length and timestamp grid.
    pub fn same_grid(&self, other: &Trajectory) -> bool {
        self.len() == other.len()
            && self
                .times()
                .zip(other.times())
                .all(|(a, b)| (a - b).abs() <= 1e-9)
    }
}

fn require_same_grid(a: &Trajectory, b: &Trajectory, op: &str) -> Result<()> {
    if !a.same_grid(b) {
        return Err(Error::invalid_input(format!(
            "{op}: trajectories must share length and timestamp grid \
             ({} vs {} waypoints)",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Trajectory convergence ratio between two same-grid trajectories:
/// the mean over waypoints of `|a_t - b_t| / (|b_t| + eps)`.
///
/// Asymmetric in `(a, b)`: only the second argument normalizes the change.
/// Zero exactly when the trajectories coincide pointwise.
pub fn tcr(a: &Trajectory, b: &Trajectory, epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::invalid_input("tcr: epsilon must be positive"));
    }
    require_same_grid(a, b, "tcr")?;
    let n = a.len() as f64;
    let sum: f64 = a
        .waypoints()
        .iter()
        .zip(b.waypoints())
        .map(|(wa, wb)| wa.pos().distance(wb.pos()) / (wb.pos().norm() + epsilon))
        .sum();
    Ok(sum / n)
}

/// A planar direction. `degenerate` marks vectors whose pre-normalization
/// norm fell below [`DEGENERACY_FLOOR`]; their components are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionVector {
    pub dx: f64,
    pub dy: f64,
    #[serde(default)]
    pub degenerate: bool,
}

impl DirectionVector {
    pub fn new(dx: f64, dy: f64) -> Self {
        DirectionVector {
            dx,
            dy,
            degenerate: false,
        }
    }

    pub fn degenerate() -> Self {
        DirectionVector {
            dx: 0.0,
            dy: 0.0,
            degenerate: true,
        }
    }

    /// Unit direction from a raw vector, or the degenerate marker when the
    /// norm is below the floor.
    pub fn from_vec_normalized(v: Vec2) -> Self {
        let n = v.norm();
        if n < DEGENERACY_FLOOR {
            DirectionVector::degenerate()
        } else {
            DirectionVector::new(v.x / n, v.y / n)
        }
    }

    pub fn as_vec(&self) -> Vec2 {
        Vec2::new(self.dx, self.dy)
    }

    pub fn dot(&self, other: &DirectionVector) -> f64 {
        self.dx * other.dx + self.dy * other.dy
    }

    pub fn norm(&self) -> f64 {
        self.as_vec().norm()
    }
}

/// Average direction of a trajectory: the mean of its eps-normalized
/// segment displacements, renormalized to unit length. Degenerate when the
/// displacements cancel or are all (near) zero.
pub fn avg_direction(traj: &Trajectory, epsilon: f64) -> Result<DirectionVector> {
    avg_direction_of_points(traj.waypoints(), epsilon)
}

fn avg_direction_of_points(waypoints: &[Waypoint], epsilon: f64) -> Result<DirectionVector> {
    if waypoints.len() < 2 {
        return Err(Error::invalid_input(
            "avg_direction: need at least 2 waypoints",
        ));
    }
    let mut sum = Vec2::ZERO;
    for pair in waypoints.windows(2) {
        let d = pair[1].pos() - pair[0].pos();
        sum = sum + d * (1.0 / (d.norm() + epsilon));
    }
    let mean = sum * (1.0 / (waypoints.len() - 1) as f64);
    Ok(DirectionVector::from_vec_normalized(mean))
}

/// Mean direction over a set of per-trajectory directions: the arithmetic
/// mean renormalized by `norm + eps`. Degenerate directions contribute a
/// zero vector; the result is degenerate when the mean itself (pre
/// normalization) falls below the floor.
pub fn mean_direction(dirs: &[DirectionVector], epsilon: f64) -> Result<DirectionVector> {
    if dirs.is_empty() {
        return Err(Error::invalid_input("mean_direction: empty input"));
    }
    let mut sum = Vec2::ZERO;
    for d in dirs {
        sum = sum + d.as_vec();
    }
    let mean = sum * (1.0 / dirs.len() as f64);
    let n = mean.norm();
    if n < DEGENERACY_FLOOR {
        return Ok(DirectionVector::degenerate());
    }
    Ok(DirectionVector::new(
        mean.x / (n + epsilon),
        mean.y / (n + epsilon),
    ))
}

/// Smooth-L1 error between two same-grid trajectories, averaged over all
/// `2 * len` coordinates: `0.5 d^2 / beta` for `|d| < beta`, else
/// `|d| - 0.5 beta`.
pub fn smooth_l1(pred: &Trajectory, gt: &Trajectory, beta: f64) -> Result<f64> {
    require_same_grid(pred, gt, "smooth_l1")?;
    smooth_l1_waypoints(pred.waypoints(), gt.waypoints(), beta)
}

/// Smooth-L1 over raw waypoint slices; lets callers score partial or
/// single-waypoint comparisons that would not form a valid [`Trajectory`].
pub fn smooth_l1_waypoints(pred: &[Waypoint], gt: &[Waypoint], beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::invalid_input("smooth_l1: beta must be positive"));
    }
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::invalid_input(format!(
            "smooth_l1: length mismatch ({} vs {})",
            pred.len(),
            gt.len()
        )));
    }
    let mut sum = 0.0;
    for (p, g) in pred.iter().zip(gt) {
        for d in [p.x - g.x, p.y - g.y] {
            if !d.is_finite() {
                return Err(Error::invalid_input("smooth_l1: non-finite coordinate"));
            }
            let ad = d.abs();
            sum += if ad < beta {
                0.5 * d * d / beta
            } else {
                ad - 0.5 * beta
            };
        }
    }
    Ok(sum / (2 * pred.len()) as f64)
}
