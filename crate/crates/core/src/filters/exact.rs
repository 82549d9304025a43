use super::{FilterOutcome, Stage};
use crate::expr::Expr;
use crate::fpn::{oracle_sign, OracleError};

/// Exact sign by arbitrary-precision dyadic arithmetic. Total on finite
/// inputs.
#[derive(Clone, Debug)]
pub struct DyadicStage {
    expr: Expr,
}

impl DyadicStage {
    pub fn new(e: &Expr) -> DyadicStage {
        DyadicStage { expr: e.clone() }
    }
}

impl Stage for DyadicStage {
    fn name(&self) -> &str {
        "dyadic"
    }

    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        match oracle_sign(&self.expr, inputs) {
            Ok(s) => FilterOutcome::Certain(s),
            Err(OracleError::NonFinite { .. } | OracleError::Arity { .. }) => {
                FilterOutcome::Uncertain
            }
        }
    }

    fn is_total(&self) -> bool {
        true
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}
