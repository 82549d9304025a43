use super::{FilterOutcome, Stage};
use crate::expr::tape::Tape;
use crate::expr::Expr;
use crate::fpn::Sign;
use crate::interval::{run_tape, with_interval_registers, Interval};

/// Evaluates the realisation in outward-rounded interval arithmetic and
/// certifies the sign when the result excludes zero or is exactly `[0, 0]`.
#[derive(Clone, Debug)]
pub struct IntervalFilter {
    tape: Tape,
    root: u32,
    arity: usize,
}

impl IntervalFilter {
    pub fn new(e: &Expr) -> IntervalFilter {
        let mut tape = Tape::new();
        let root = tape.expr(e);
        IntervalFilter {
            tape,
            root,
            arity: e.max_input_index(),
        }
    }

    /// The enclosure of every tape register, or `None` if any is non-finite.
    pub fn enclosure(&self, inputs: &[f64]) -> Option<Interval> {
        let pts: Vec<Interval> = inputs.iter().map(|&x| Interval::point(x)).collect();
        with_interval_registers(self.tape.len(), |regs| {
            run_tape(&self.tape, &pts, regs).then(|| regs[self.root as usize])
        })
    }
}

impl Stage for IntervalFilter {
    fn name(&self) -> &str {
        "interval"
    }

    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        let mut pts = [Interval::point(0.0); 32];
        let r = if self.arity <= pts.len() {
            for (p, &x) in pts.iter_mut().zip(inputs) {
                *p = Interval::point(x);
            }
            with_interval_registers(self.tape.len(), |regs| {
                run_tape(&self.tape, &pts[..self.arity], regs).then(|| regs[self.root as usize])
            })
        } else {
            self.enclosure(inputs)
        };
        match r {
            Some(i) if i.lo > 0.0 => FilterOutcome::Certain(Sign::Positive),
            Some(i) if i.hi < 0.0 => FilterOutcome::Certain(Sign::Negative),
            Some(i) if i.lo == 0.0 && i.hi == 0.0 => FilterOutcome::Certain(Sign::Zero),
            _ => FilterOutcome::Uncertain,
        }
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}
