use super::{FilterOutcome, Stage};
use crate::fpn::Sign;

/// Recognises four incircle inputs `(a, b, c, d)` that form an axis-aligned
/// rectangle in either winding and answers 0 without any arithmetic.
#[derive(Clone, Copy, Debug, Default)]
pub struct IncircleRectFilter;

impl Stage for IncircleRectFilter {
    fn name(&self) -> &str {
        "incircle-rect"
    }

    fn apply(&self, x: &[f64]) -> FilterOutcome {
        let [ax, ay, bx, by, cx, cy, dx, dy] = x[..8] else {
            return FilterOutcome::Uncertain;
        };
        if (ax == bx && by == cy && cx == dx && dy == ay)
            || (ay == by && bx == cx && cy == dy && dx == ax)
        {
            FilterOutcome::Certain(Sign::Zero)
        } else {
            FilterOutcome::Uncertain
        }
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(*self)
    }
}
