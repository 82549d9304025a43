use super::{FilterOutcome, Stage};
use crate::expr::{Expr, SumOp};
use crate::fpn::Sign;

/// Certifies zero results by structure: a leaf equal to zero, an
/// atom-on-atom sum or difference that evaluates to zero, a sum of two
/// certified zeros, or a product with a certified zero factor.
#[derive(Clone, Debug)]
pub struct ZeroFilter {
    expr: Expr,
}

impl ZeroFilter {
    pub fn new(e: &Expr) -> ZeroFilter {
        ZeroFilter { expr: e.clone() }
    }

    pub fn certifies_zero(&self, inputs: &[f64]) -> bool {
        is_zero(&self.expr, inputs)
    }
}

fn leaf(e: &Expr, inputs: &[f64]) -> f64 {
    match e {
        Expr::Constant(c) => *c,
        Expr::Input(i) => inputs[*i - 1],
        _ => unreachable!("atoms are leaves"),
    }
}

fn is_zero(e: &Expr, inputs: &[f64]) -> bool {
    if e.is_leaf() {
        return leaf(e, inputs) == 0.0;
    }
    if let Some((op, l, r)) = e.as_atom_sum() {
        let (x, y) = (leaf(l, inputs), leaf(r, inputs));
        return match op {
            SumOp::Sum => x + y == 0.0,
            SumOp::Difference => x - y == 0.0,
        };
    }
    match e {
        Expr::Sum(l, r) | Expr::Difference(l, r) => is_zero(l, inputs) && is_zero(r, inputs),
        Expr::Product(l, r) => is_zero(l, inputs) || is_zero(r, inputs),
        _ => unreachable!("leaves handled above"),
    }
}

impl Stage for ZeroFilter {
    fn name(&self) -> &str {
        "zero"
    }

    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        if self.certifies_zero(inputs) {
            FilterOutcome::Certain(Sign::Zero)
        } else {
            FilterOutcome::Uncertain
        }
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}
