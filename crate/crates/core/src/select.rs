//! Trajectory selection strategies over a candidate set.
//!
//! The default strategy picks the candidate whose average direction is most
//! aligned with the mean direction of all candidates. The alternatives
//! (smoothness, soft-min averaging, alignment with the historical heading)
//! exist for ablation comparisons, alongside trivial first/last picks.

use crate::error::{Error, Result};
use crate::geometry::wrap_angle;
use crate::trajectory::{
    avg_direction, mean_direction, DirectionVector, Trajectory, Waypoint, DEGENERACY_FLOOR,
    DEFAULT_EPSILON,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    /// Most aligned with the mean direction over all candidates.
    Directional,
    /// Lowest variance of inter-segment heading changes.
    SmoothSel,
    /// Soft-min weighted average of all candidates.
    SoftMin,
    /// Best aligned with the historical motion heading.
    MaxCons,
    /// Most recent candidate.
    Last,
    /// Initial candidate.
    First,
}

impl SelectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            SelectorKind::Directional => "directional",
            SelectorKind::SmoothSel => "smooth_sel",
            SelectorKind::SoftMin => "soft_min",
            SelectorKind::MaxCons => "max_cons",
            SelectorKind::Last => "last",
            SelectorKind::First => "first",
        }
    }
}

impl std::str::FromStr for SelectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "directional" => Ok(SelectorKind::Directional),
            "smooth_sel" | "smoothsel" => Ok(SelectorKind::SmoothSel),
            "soft_min" | "softmin" => Ok(SelectorKind::SoftMin),
            "max_cons" | "maxcons" => Ok(SelectorKind::MaxCons),
            "last" => Ok(SelectorKind::Last),
            "first" => Ok(SelectorKind::First),
            other => Err(Error::config(format!("unknown selector `{other}`"))),
        }
    }
}

/// Result of a selection: the index of the (nearest) buffer candidate and
/// the selected trajectory. For [`SelectorKind::SoftMin`] the trajectory is
/// a weighted average, not necessarily an element of the candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub trajectory: Trajectory,
}

/// Knobs shared by the selectors.
#[derive(Debug, Clone)]
pub struct SelectorOptions {
    pub epsilon: f64,
    /// Soft-min temperature.
    pub tau: f64,
    /// Historical motion heading for [`SelectorKind::MaxCons`].
    pub heading: DirectionVector,
}

impl Default for SelectorOptions {
    fn default() -> Self {
        SelectorOptions {
            epsilon: DEFAULT_EPSILON,
            tau: 1.0,
            heading: DirectionVector::degenerate(),
        }
    }
}

/// Dispatch a selection strategy over a non-empty candidate list.
pub fn select(
    kind: SelectorKind,
    candidates: &[Trajectory],
    opts: &SelectorOptions,
) -> Result<Selection> {
    require_candidates(candidates)?;
    match kind {
        SelectorKind::Directional => select_directional(candidates, opts.epsilon),
        SelectorKind::SmoothSel => select_smoothsel(candidates),
        SelectorKind::SoftMin => select_softmin(candidates, opts.tau),
        SelectorKind::MaxCons => select_maxcons(candidates, &opts.heading),
        SelectorKind::Last => Ok(Selection {
            index: candidates.len() - 1,
            trajectory: candidates[candidates.len() - 1].clone(),
        }),
        SelectorKind::First => Ok(Selection {
            index: 0,
            trajectory: candidates[0].clone(),
        }),
    }
}

fn require_candidates(candidates: &[Trajectory]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::invalid_input("selection over empty candidate list"));
    }
    for (i, c) in candidates.iter().enumerate() {
        if !candidates[0].same_grid(c) {
            return Err(Error::invalid_input(format!(
                "candidate {i} is not on the shared timestamp grid"
            )));
        }
    }
    Ok(())
}

/// Pick the candidate whose direction has the smallest angle to the mean
/// direction over all candidates. Falls back to the most recent candidate
/// when the mean direction is degenerate; ties break to the lowest index.
pub fn select_directional(candidates: &[Trajectory], epsilon: f64) -> Result<Selection> {
    require_candidates(candidates)?;
    let dirs: Vec<DirectionVector> = candidates
        .iter()
        .map(|c| avg_direction(c, epsilon))
        .collect::<Result<_>>()?;
    let mean = mean_direction(&dirs, epsilon)?;
    if mean.degenerate {
        let index = candidates.len() - 1;
        return Ok(Selection {
            index,
            trajectory: candidates[index].clone(),
        });
    }
    let mut best = 0;
    let mut best_angle = f64::INFINITY;
    for (i, d) in dirs.iter().enumerate() {
        let angle = d.dot(&mean).clamp(-1.0, 1.0).acos();
        if angle < best_angle {
            best_angle = angle;
            best = i;
        }
    }
    Ok(Selection {
        index: best,
        trajectory: candidates[best].clone(),
    })
}

/// Variance of the signed heading changes between consecutive displacement
/// segments. Candidates without at least two non-degenerate segments score
/// infinity.
fn heading_change_variance(waypoints: &[Waypoint]) -> f64 {
    let mut headings = Vec::new();
    for pair in waypoints.windows(2) {
        let d = pair[1].pos() - pair[0].pos();
        if d.norm() >= DEGENERACY_FLOOR {
            headings.push(d.y.atan2(d.x));
        }
    }
    if headings.len() < 2 {
        return f64::INFINITY;
    }
    let changes: Vec<f64> = headings
        .windows(2)
        .map(|h| wrap_angle(h[1] - h[0]))
        .collect();
    let n = changes.len() as f64;
    let mean = changes.iter().sum::<f64>() / n;
    changes.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n
}

/// Pick the candidate with the lowest curvature variation, realized as the
/// population variance of inter-segment heading changes.
pub fn select_smoothsel(candidates: &[Trajectory]) -> Result<Selection> {
    require_candidates(candidates)?;
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let score = heading_change_variance(c.waypoints());
        if score < best_score {
            best_score = score;
            best = i;
        }
    }
    Ok(Selection {
        index: best,
        trajectory: candidates[best].clone(),
    })
}

/// Soft-min weighted average of all candidates. Each candidate's cost is its
/// mean pointwise distance to the pointwise-mean trajectory; weights are
/// `softmin(cost / tau)`. Returns the averaged trajectory together with the
/// index of the candidate nearest to it.
pub fn select_softmin(candidates: &[Trajectory], tau: f64) -> Result<Selection> {
    require_candidates(candidates)?;
    if tau <= 0.0 {
        return Err(Error::invalid_input("select_softmin: tau must be positive"));
    }
    let n = candidates.len();
    let len = candidates[0].len();

    let mut mean_points = vec![crate::geometry::Vec2::ZERO; len];
    for c in candidates {
        for (m, w) in mean_points.iter_mut().zip(c.waypoints()) {
            *m = *m + w.pos();
        }
    }
    for m in &mut mean_points {
        *m = *m * (1.0 / n as f64);
    }

    let cost_to = |c: &Trajectory, points: &[crate::geometry::Vec2]| -> f64 {
        c.waypoints()
            .iter()
            .zip(points)
            .map(|(w, m)| w.pos().distance(*m))
            .sum::<f64>()
            / len as f64
    };

    let costs: Vec<f64> = candidates.iter().map(|c| cost_to(c, &mean_points)).collect();
    let min_cost = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = costs.iter().map(|c| (-(c - min_cost) / tau).exp()).collect();
    let total: f64 = exps.iter().sum();

    // Average relative to the first candidate so a buffer of identical
    // trajectories reproduces them bit-exactly.
    let anchor = candidates[0].waypoints();
    let mut avg_points: Vec<crate::geometry::Vec2> =
        anchor.iter().map(|w| w.pos()).collect();
    for (c, e) in candidates.iter().zip(&exps) {
        let w = e / total;
        for ((a, p), base) in avg_points.iter_mut().zip(c.waypoints()).zip(anchor) {
            *a = *a + (p.pos() - base.pos()) * w;
        }
    }

    let waypoints: Vec<Waypoint> = candidates[0]
        .waypoints()
        .iter()
        .zip(&avg_points)
        .map(|(w, p)| Waypoint::new(w.t, p.x, p.y))
        .collect();
    let trajectory = Trajectory::new(waypoints)?;

    let mut nearest = 0;
    let mut nearest_cost = f64::INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let d = cost_to(c, &avg_points);
        if d < nearest_cost {
            nearest_cost = d;
            nearest = i;
        }
    }
    Ok(Selection {
        index: nearest,
        trajectory,
    })
}

/// Pick the candidate whose direction best aligns with `heading`. A
/// degenerate heading falls back to the most recent candidate.
pub fn select_maxcons(candidates: &[Trajectory], heading: &DirectionVector) -> Result<Selection> {
    require_candidates(candidates)?;
    if heading.degenerate {
        let index = candidates.len() - 1;
        return Ok(Selection {
            index,
            trajectory: candidates[index].clone(),
        });
    }
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let d = avg_direction(c, DEFAULT_EPSILON)?;
        let dot = d.dot(heading);
        if dot > best_dot {
            best_dot = dot;
            best = i;
        }
    }
    Ok(Selection {
        index: best,
        trajectory: candidates[best].clone(),
    })
}
