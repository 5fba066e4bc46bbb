//! Oriented-rectangle collision test between two vehicle footprints.

use super::AgentState;
use crate::geometry::OrientedRect;

pub fn footprint(state: &AgentState) -> OrientedRect {
    OrientedRect::new(state.pos(), state.heading, state.length, state.width)
}

/// True iff the two oriented footprint rectangles overlap (separating-axis
/// test over the four rectangle axes). Touching counts as contact.
pub fn check_collision(a: &AgentState, b: &AgentState) -> bool {
    footprint(a).overlaps(&footprint(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car(x: f64, y: f64, heading: f64) -> AgentState {
        AgentState::car(x, y, heading, 0.0)
    }

    #[test]
    fn identical_poses_collide() {
        let a = car(3.0, -2.0, 0.7);
        assert!(check_collision(&a, &a));
    }

    #[test]
    fn far_apart_do_not_collide() {
        assert!(!check_collision(&car(0.0, 0.0, 0.0), &car(100.0, 0.0, 0.0)));
    }

    #[test]
    fn lateral_offset_boundary() {
        // Two 4.0 x 1.8 boxes with parallel headings: 1.8 m of combined
        // half-widths, so 1.7 m offset overlaps and 1.9 m does not.
        assert!(check_collision(&car(0.0, 0.0, 0.0), &car(0.0, 1.7, 0.0)));
        assert!(!check_collision(&car(0.0, 0.0, 0.0), &car(0.0, 1.9, 0.0)));
    }

    #[test]
    fn crossing_orientations() {
        let along_x = car(0.0, 0.0, 0.0);
        let along_y = car(0.0, 2.4, std::f64::consts::FRAC_PI_2);
        // Crossing car's nose (2.0 m half length) reaches y = 0.4, ego
        // half-width is 0.9: overlap.
        assert!(check_collision(&along_x, &along_y));
        let along_y_far = car(0.0, 3.0, std::f64::consts::FRAC_PI_2);
        assert!(!check_collision(&along_x, &along_y_far));
    }
}
