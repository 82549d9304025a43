use thiserror::Error;

use super::{Dyadic, Sign};
use crate::expr::Expr;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("input {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("expression needs {needed} inputs, got {got}")]
    Arity { needed: usize, got: usize },
}

/// Exact real value of the polynomial behind `e` at the given inputs.
///
/// Every operation is carried out in [`Dyadic`] arithmetic, so no rounding
/// occurs anywhere; this is the value of `p`, not of its realisation `p̃`.
pub fn oracle_value(e: &Expr, inputs: &[f64]) -> Result<Dyadic, OracleError> {
    let needed = e.max_input_index();
    if inputs.len() < needed {
        return Err(OracleError::Arity {
            needed,
            got: inputs.len(),
        });
    }
    let exact = inputs
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            Dyadic::from_f64(value).map_err(|_| OracleError::NonFinite { index, value })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(eval_exact(e, &exact))
}

/// Exact sign of the polynomial behind `e` at the given inputs.
pub fn oracle_sign(e: &Expr, inputs: &[f64]) -> Result<Sign, OracleError> {
    oracle_value(e, inputs).map(|v| v.sign())
}

pub(crate) fn eval_exact(e: &Expr, inputs: &[Dyadic]) -> Dyadic {
    match e {
        Expr::Constant(c) => Dyadic::from_f64(*c).expect("constants are finite"),
        Expr::Input(i) => inputs[*i - 1].clone(),
        Expr::Sum(l, r) => eval_exact(l, inputs) + eval_exact(r, inputs),
        Expr::Difference(l, r) => eval_exact(l, inputs) - eval_exact(r, inputs),
        Expr::Product(l, r) => eval_exact(l, inputs) * eval_exact(r, inputs),
    }
}
