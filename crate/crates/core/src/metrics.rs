//! Evaluation formulas: the 0-5 closed-loop safety score, the PDM score
//! aggregation, open-loop L2 and collision rate, and suite-level summary
//! tables.

use crate::error::{Error, Result};
use crate::geometry::OrientedRect;
use crate::trajectory::Trajectory;
use crate::world::{AgentState, Category, ClosedLoopOutcome, DEFAULT_LENGTH, DEFAULT_WIDTH};
use serde::{Deserialize, Serialize};

/// Inputs to the closed-loop safety score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NnsInput {
    pub collided: bool,
    /// Relative speed magnitude at first contact, m/s.
    pub impact_speed: f64,
    /// Impact speed of the no-action baseline, m/s.
    pub reference_speed: f64,
}

impl NnsInput {
    pub fn from_outcome(outcome: &ClosedLoopOutcome) -> Result<Self> {
        if outcome.collided {
            let impact_speed = outcome.impact_speed.ok_or_else(|| {
                Error::invalid_input(format!(
                    "outcome `{}` collided without an impact speed",
                    outcome.scenario_id
                ))
            })?;
            let reference_speed = outcome.reference_speed.ok_or_else(|| {
                Error::invalid_input(format!(
                    "outcome `{}` collided without a reference speed",
                    outcome.scenario_id
                ))
            })?;
            Ok(NnsInput {
                collided: true,
                impact_speed,
                reference_speed,
            })
        } else {
            Ok(NnsInput {
                collided: false,
                impact_speed: 0.0,
                reference_speed: outcome.reference_speed.unwrap_or(1.0),
            })
        }
    }
}

/// Safety score in [0, 5]: full score without a collision, otherwise
/// `4 * max(0, 1 - v_i / v_r)`.
pub fn nns(input: &NnsInput) -> Result<f64> {
    if !input.collided {
        return Ok(5.0);
    }
    if !(input.reference_speed > 0.0) || !input.reference_speed.is_finite() {
        return Err(Error::invalid_input(
            "nns: collided input needs a positive reference speed",
        ));
    }
    if input.impact_speed < 0.0 || !input.impact_speed.is_finite() {
        return Err(Error::invalid_input(
            "nns: impact speed must be finite and non-negative",
        ));
    }
    Ok(4.0 * (1.0 - input.impact_speed / input.reference_speed).max(0.0))
}

/// Per-run subscores, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdmsSubscores {
    /// No at-fault collision.
    pub nc: f64,
    /// Drivable-area compliance.
    pub dac: f64,
    /// Time-to-collision margin.
    pub ttc: f64,
    pub comfort: f64,
    /// Ego progress.
    pub ep: f64,
}

impl PdmsSubscores {
    /// Simple closed-loop surrogate: `nc` from the collision flag, `ep`
    /// from a progress ratio, the remaining subscores neutral.
    pub fn surrogate(collided: bool, progress_ratio: f64) -> Self {
        PdmsSubscores {
            nc: if collided { 0.0 } else { 1.0 },
            dac: 1.0,
            ttc: 1.0,
            comfort: 1.0,
            ep: progress_ratio.clamp(0.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("nc", self.nc),
            ("dac", self.dac),
            ("ttc", self.ttc),
            ("comfort", self.comfort),
            ("ep", self.ep),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::invalid_input(format!(
                    "pdms subscore {name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Weights of the averaged subscores. Defaults: progress 5, time-to-
/// collision 5, comfort 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdmsWeights {
    pub ep: f64,
    pub ttc: f64,
    pub comfort: f64,
}

impl Default for PdmsWeights {
    fn default() -> Self {
        PdmsWeights {
            ep: 5.0,
            ttc: 5.0,
            comfort: 2.0,
        }
    }
}

/// PDM score in [0, 1]: the penalty product (nc, dac) times the weighted
/// average of the remaining subscores.
pub fn pdms(sub: &PdmsSubscores, weights: &PdmsWeights) -> Result<f64> {
    sub.validate()?;
    if !(weights.ep > 0.0) || !(weights.ttc > 0.0) || !(weights.comfort > 0.0) {
        return Err(Error::invalid_input("pdms weights must be positive"));
    }
    let penalty = sub.nc * sub.dac;
    let avg = (weights.ep * sub.ep + weights.ttc * sub.ttc + weights.comfort * sub.comfort)
        / (weights.ep + weights.ttc + weights.comfort);
    Ok(penalty * avg)
}

/// Which waypoints enter the L2 average at a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L2Convention {
    /// Mean error over all waypoints up to and including the horizon.
    PrefixAverage,
    /// Error at the last waypoint within the horizon only.
    AtHorizon,
}

/// Per-horizon L2 displacement error between a prediction and ground truth
/// on a shared grid.
pub fn open_loop_l2(
    pred: &Trajectory,
    gt: &Trajectory,
    horizons: &[f64],
    convention: L2Convention,
) -> Result<Vec<f64>> {
    if !pred.same_grid(gt) {
        return Err(Error::invalid_input(
            "open_loop_l2: trajectories must share the timestamp grid",
        ));
    }
    let errors: Vec<(f64, f64)> = pred
        .waypoints()
        .iter()
        .zip(gt.waypoints())
        .map(|(p, g)| (p.t, p.pos().distance(g.pos())))
        .collect();

    let mut out = Vec::with_capacity(horizons.len());
    for &h in horizons {
        let prefix: Vec<f64> = errors
            .iter()
            .filter(|(t, _)| *t <= h + 1e-9)
            .map(|(_, e)| *e)
            .collect();
        if prefix.is_empty() {
            return Err(Error::invalid_input(format!(
                "open_loop_l2: horizon {h} s precedes the first waypoint"
            )));
        }
        let value = match convention {
            L2Convention::PrefixAverage => prefix.iter().sum::<f64>() / prefix.len() as f64,
            L2Convention::AtHorizon => *prefix.last().unwrap(),
        };
        out.push(value);
    }
    Ok(out)
}

/// Actor footprints at one grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyFrame {
    pub t: f64,
    pub actors: Vec<AgentState>,
}

/// Heading of the ego footprint at each waypoint, taken from the incoming
/// segment direction (the first segment starts at the origin); a degenerate
/// segment inherits the previous heading.
fn waypoint_headings(traj: &Trajectory) -> Vec<f64> {
    let mut headings = Vec::with_capacity(traj.len());
    let mut prev = crate::geometry::Vec2::ZERO;
    let mut heading = 0.0;
    for w in traj.waypoints() {
        let d = w.pos() - prev;
        if d.norm() > 1e-9 {
            heading = d.y.atan2(d.x);
        }
        headings.push(heading);
        prev = w.pos();
    }
    headings
}

/// Earliest grid time at which the ego footprint along `pred` overlaps any
/// actor footprint, or `None`.
pub fn first_predicted_collision(
    pred: &Trajectory,
    occupancy: &[OccupancyFrame],
    ego_extent: (f64, f64),
) -> Option<f64> {
    let headings = waypoint_headings(pred);
    let mut first: Option<f64> = None;
    for frame in occupancy {
        let Some(idx) = pred.times().position(|t| (t - frame.t).abs() <= 1e-6) else {
            continue;
        };
        let w = pred.waypoints()[idx];
        let ego = OrientedRect::new(w.pos(), headings[idx], ego_extent.0, ego_extent.1);
        let hit = frame.actors.iter().any(|a| {
            ego.overlaps(&OrientedRect::new(a.pos(), a.heading, a.length, a.width))
        });
        if hit && first.map_or(true, |t| frame.t < t) {
            first = Some(frame.t);
        }
    }
    first
}

/// Percentage of samples whose predicted trajectory overlaps an actor
/// footprint at or before each horizon (cumulative in the horizon).
pub fn open_loop_collision_rate(
    samples: &[(Trajectory, Vec<OccupancyFrame>)],
    horizons: &[f64],
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid_input("open_loop_collision_rate: no samples"));
    }
    let firsts: Vec<Option<f64>> = samples
        .iter()
        .map(|(pred, occ)| {
            first_predicted_collision(pred, occ, (DEFAULT_LENGTH, DEFAULT_WIDTH))
        })
        .collect();
    Ok(horizons
        .iter()
        .map(|&h| {
            let hits = firsts
                .iter()
                .filter(|f| f.map_or(false, |t| t <= h + 1e-9))
                .count();
            100.0 * hits as f64 / samples.len() as f64
        })
        .collect())
}

/// One summary row: a category (or the overall average) with its scenario
/// count, collision percentage and mean safety score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub label: String,
    pub scenarios: usize,
    pub collisions: usize,
    pub collision_rate_pct: f64,
    pub mean_nns: f64,
}

/// Suite summary: the overall average first, then one row per category
/// present, in the fixed order stationary / frontal / side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub rows: Vec<CategorySummary>,
}

impl SuiteSummary {
    pub fn row(&self, label: &str) -> Option<&CategorySummary> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Fixed-format CSV body: `category,scenarios,collisions,collision_rate_pct,mean_nns`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,scenarios,collisions,collision_rate_pct,mean_nns\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.2},{:.4}\n",
                r.label, r.scenarios, r.collisions, r.collision_rate_pct, r.mean_nns
            ));
        }
        out
    }
}

fn summarize(label: &str, outcomes: &[&ClosedLoopOutcome]) -> Result<CategorySummary> {
    let collisions = outcomes.iter().filter(|o| o.collided).count();
    let mut nns_sum = 0.0;
    for o in outcomes {
        nns_sum += nns(&NnsInput::from_outcome(o)?)?;
    }
    let n = outcomes.len();
    Ok(CategorySummary {
        label: label.to_string(),
        scenarios: n,
        collisions,
        collision_rate_pct: 100.0 * collisions as f64 / n as f64,
        mean_nns: nns_sum / n as f64,
    })
}

/// Aggregate closed-loop outcomes into the per-category summary table.
pub fn aggregate_suite(outcomes: &[ClosedLoopOutcome]) -> Result<SuiteSummary> {
    if outcomes.is_empty() {
        return Err(Error::invalid_input("aggregate_suite: no outcomes"));
    }
    let all: Vec<&ClosedLoopOutcome> = outcomes.iter().collect();
    let mut rows = vec![summarize("avg", &all)?];
    for category in Category::ALL {
        let subset: Vec<&ClosedLoopOutcome> = outcomes
            .iter()
            .filter(|o| o.category == category)
            .collect();
        if !subset.is_empty() {
            rows.push(summarize(category.name(), &subset)?);
        }
    }
    Ok(SuiteSummary { rows })
}

/// Open-loop evaluation table: per-horizon L2 and collision rate plus their
/// averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenLoopReport {
    pub horizons: Vec<f64>,
    pub l2_m: Vec<f64>,
    pub collision_rate_pct: Vec<f64>,
    pub avg_l2_m: f64,
    pub avg_collision_rate_pct: f64,
    pub samples: usize,
    pub skipped: usize,
}

impl OpenLoopReport {
    /// Fixed-format CSV body: `horizon_s,l2_m,collision_rate_pct` with a
    /// trailing `avg` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("horizon_s,l2_m,collision_rate_pct\n");
        for ((h, l2), rate) in self
            .horizons
            .iter()
            .zip(&self.l2_m)
            .zip(&self.collision_rate_pct)
        {
            out.push_str(&format!("{h:.1},{l2:.4},{rate:.2}\n"));
        }
        out.push_str(&format!(
            "avg,{:.4},{:.2}\n",
            self.avg_l2_m, self.avg_collision_rate_pct
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Mode;

    #[test]
    fn nns_no_collision_full_score() {
        let score = nns(&NnsInput {
            collided: false,
            impact_speed: 0.0,
            reference_speed: 1.0,
        })
        .unwrap();
        assert_eq!(score, 5.0);
    }

    #[test]
    fn nns_full_impact_zero() {
        let score = nns(&NnsInput {
            collided: true,
            impact_speed: 10.0,
            reference_speed: 10.0,
        })
        .unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn nns_partial_credit() {
        let score = nns(&NnsInput {
            collided: true,
            impact_speed: 2.5,
            reference_speed: 10.0,
        })
        .unwrap();
        assert!((score - 3.0).abs() < 1e-12);
    }

    #[test]
    fn nns_clamps_harder_than_reference() {
        let score = nns(&NnsInput {
            collided: true,
            impact_speed: 15.0,
            reference_speed: 10.0,
        })
        .unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn nns_rejects_bad_reference() {
        assert!(nns(&NnsInput {
            collided: true,
            impact_speed: 1.0,
            reference_speed: 0.0,
        })
        .is_err());
    }

    #[test]
    fn pdms_identity_and_penalty() {
        let w = PdmsWeights::default();
        let ones = PdmsSubscores {
            nc: 1.0,
            dac: 1.0,
            ttc: 1.0,
            comfort: 1.0,
            ep: 1.0,
        };
        assert!((pdms(&ones, &w).unwrap() - 1.0).abs() < 1e-12);
        let crashed = PdmsSubscores { nc: 0.0, ..ones };
        assert_eq!(pdms(&crashed, &w).unwrap(), 0.0);
    }

    #[test]
    fn pdms_hand_example() {
        let w = PdmsWeights::default();
        let sub = PdmsSubscores {
            nc: 1.0,
            dac: 0.9,
            ttc: 1.0,
            comfort: 1.0,
            ep: 0.8,
        };
        let got = pdms(&sub, &w).unwrap();
        assert!((got - 0.825).abs() < 1e-12);
    }

    fn grid_traj(errors: &[f64]) -> (Trajectory, Trajectory) {
        let gt: Vec<(f64, f64)> = (1..=errors.len()).map(|i| (i as f64, 0.0)).collect();
        let pred: Vec<(f64, f64)> = gt
            .iter()
            .zip(errors)
            .map(|(&(x, y), &e)| (x, y + e))
            .collect();
        (
            Trajectory::on_grid(0.5, &pred).unwrap(),
            Trajectory::on_grid(0.5, &gt).unwrap(),
        )
    }

    #[test]
    fn l2_zero_and_constant_offset() {
        let (_, gt) = grid_traj(&[0.0; 6]);
        let zero = open_loop_l2(&gt, &gt, &[1.0, 2.0, 3.0], L2Convention::PrefixAverage).unwrap();
        assert_eq!(zero, vec![0.0, 0.0, 0.0]);

        let (pred, gt) = grid_traj(&[1.0; 6]);
        let ones = open_loop_l2(&pred, &gt, &[1.0, 2.0, 3.0], L2Convention::PrefixAverage).unwrap();
        for v in ones {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_prefix_average_hand_values() {
        let (pred, gt) = grid_traj(&[0.2, 0.4, 0.6, 0.8, 1.0, 1.2]);
        let got = open_loop_l2(&pred, &gt, &[1.0, 2.0, 3.0], L2Convention::PrefixAverage).unwrap();
        assert!((got[0] - 0.3).abs() < 1e-12);
        assert!((got[1] - 0.5).abs() < 1e-12);
        assert!((got[2] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn l2_at_horizon_convention() {
        let (pred, gt) = grid_traj(&[0.2, 0.4, 0.6, 0.8, 1.0, 1.2]);
        let got = open_loop_l2(&pred, &gt, &[1.0, 2.0, 3.0], L2Convention::AtHorizon).unwrap();
        assert!((got[0] - 0.4).abs() < 1e-12);
        assert!((got[1] - 0.8).abs() < 1e-12);
        assert!((got[2] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn l2_grid_mismatch_errors() {
        let (pred, _) = grid_traj(&[0.0; 6]);
        let other = Trajectory::on_grid(0.25, &[(1.0, 0.0), (2.0, 0.0)]).unwrap();
        assert!(open_loop_l2(&pred, &other, &[1.0], L2Convention::PrefixAverage).is_err());
    }

    fn straight_pred() -> Trajectory {
        Trajectory::on_grid(
            0.5,
            &[(4.0, 0.0), (8.0, 0.0), (12.0, 0.0), (16.0, 0.0), (20.0, 0.0), (24.0, 0.0)],
        )
        .unwrap()
    }

    fn occupancy_with_actor_at(t: f64, x: f64) -> Vec<OccupancyFrame> {
        (1..=6)
            .map(|i| {
                let ft = 0.5 * i as f64;
                let actors = if (ft - t).abs() < 1e-9 {
                    vec![AgentState::car(x, 0.0, 0.0, 0.0)]
                } else {
                    vec![]
                };
                OccupancyFrame { t: ft, actors }
            })
            .collect()
    }

    #[test]
    fn collision_rate_cumulative_in_horizon() {
        // One of four samples passes through an actor at t = 2 s.
        let clean: Vec<OccupancyFrame> = (1..=6)
            .map(|i| OccupancyFrame {
                t: 0.5 * i as f64,
                actors: vec![],
            })
            .collect();
        let samples = vec![
            (straight_pred(), occupancy_with_actor_at(2.0, 16.0)),
            (straight_pred(), clean.clone()),
            (straight_pred(), clean.clone()),
            (straight_pred(), clean),
        ];
        let got = open_loop_collision_rate(&samples, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(got, vec![0.0, 25.0, 25.0]);
    }

    #[test]
    fn collision_rate_all_collide_at_start() {
        let samples: Vec<_> = (0..3)
            .map(|_| (straight_pred(), occupancy_with_actor_at(0.5, 4.0)))
            .collect();
        let got = open_loop_collision_rate(&samples, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(got, vec![100.0, 100.0, 100.0]);
    }

    #[test]
    fn collision_rate_empty_occupancy_is_zero() {
        let clean: Vec<OccupancyFrame> = vec![];
        let samples = vec![(straight_pred(), clean)];
        let got = open_loop_collision_rate(&samples, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(got, vec![0.0, 0.0, 0.0]);
    }

    fn outcome(category: Category, collided: bool, v_i: f64, v_r: f64) -> ClosedLoopOutcome {
        ClosedLoopOutcome {
            scenario_id: "o".into(),
            category,
            mode: Mode::Imagine,
            collided,
            impact_speed: collided.then_some(v_i),
            reference_speed: Some(v_r),
            collision_time: collided.then_some(1.0),
            ego_trace: vec![],
            per_step_loop_stats: vec![],
        }
    }

    #[test]
    fn aggregate_single_clean_outcome() {
        let summary =
            aggregate_suite(&[outcome(Category::Stationary, false, 0.0, 8.0)]).unwrap();
        let stat = summary.row("stationary").unwrap();
        assert_eq!(stat.mean_nns, 5.0);
        assert_eq!(stat.collision_rate_pct, 0.0);
        assert_eq!(summary.row("avg").unwrap().scenarios, 1);
    }

    #[test]
    fn aggregate_mean_and_rate() {
        let summary = aggregate_suite(&[
            outcome(Category::Side, false, 0.0, 8.0),
            outcome(Category::Side, true, 8.0, 8.0),
        ])
        .unwrap();
        let avg = summary.row("avg").unwrap();
        assert!((avg.mean_nns - 2.5).abs() < 1e-12);
        assert!((avg.collision_rate_pct - 50.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(aggregate_suite(&[]).is_err());
    }

    #[test]
    fn aggregate_three_categories_spreadsheet() {
        // Hand-computed per-category means.
        let outcomes = vec![
            outcome(Category::Stationary, false, 0.0, 8.0),
            outcome(Category::Stationary, true, 4.0, 8.0), // nns 2.0
            outcome(Category::Frontal, true, 8.0, 8.0),    // nns 0.0
            outcome(Category::Side, true, 2.0, 8.0),       // nns 3.0
            outcome(Category::Side, false, 0.0, 8.0),
        ];
        let s = aggregate_suite(&outcomes).unwrap();
        assert!((s.row("stationary").unwrap().mean_nns - 3.5).abs() < 1e-12);
        assert!((s.row("frontal").unwrap().mean_nns - 0.0).abs() < 1e-12);
        assert!((s.row("side").unwrap().mean_nns - 4.0).abs() < 1e-12);
        assert!((s.row("avg").unwrap().mean_nns - 3.0).abs() < 1e-12);
        assert!((s.row("avg").unwrap().collision_rate_pct - 60.0).abs() < 1e-12);
    }
}
