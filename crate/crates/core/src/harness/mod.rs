//! Reproduction harness behind the `fpfilter` binary.

pub mod bench;
pub mod delaunay;
pub mod points;
pub mod precision_map;
pub mod stats;
pub mod torture;

use std::fmt::Write as _;

use crate::error_bounds::{compute_constants, derive, derive_split, phi, DeriveError, RuleSet};
use crate::expr::{format_hex_f64, Expr, SumOp, TopSplit};
use crate::fpn::{FpnParams, Sign};
use crate::predicates::{PredicateError, StagedPredicate};
use points::Row;

/// Result of one `eval` row; `stage` counts from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalLine {
    pub line: usize,
    pub sign: Sign,
    pub stage: usize,
}

impl std::fmt::Display for EvalLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} stage={}", self.sign, self.stage)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {source}")]
pub struct EvalError {
    pub line: usize,
    pub source: PredicateError,
}

pub fn eval_rows(p: &StagedPredicate, rows: &[Row]) -> Result<Vec<EvalLine>, EvalError> {
    rows.iter()
        .map(|r| {
            let (sign, k) = p
                .apply_with_stage(&r.values)
                .map_err(|source| EvalError { line: r.line, source })?;
            Ok(EvalLine {
                line: r.line,
                sign,
                stage: k + 1,
            })
        })
        .collect()
}

fn float_line(out: &mut String, label: &str, x: f64) {
    let _ = writeln!(out, "{label:<7}{x:e} ({})", format_hex_f64(x));
}

fn describe(out: &mut String, e: &Expr, ufp: bool, params: &FpnParams, indent: usize) -> Result<(), DeriveError> {
    let pad = " ".repeat(indent);
    let whole = derive(e, ufp, params)?;
    let _ = writeln!(out, "{pad}expr   {e}");
    let _ = writeln!(out, "{pad}a      {}", whole.a);
    let _ = writeln!(out, "{pad}m      {}", whole.m);
    match e.top_decomposition() {
        TopSplit::SumLike { left, right, op } => {
            let split = derive_split(&RuleSet::standard(), left, right, op, ufp, params)?;
            let op = match op {
                SumOp::Sum => "+",
                SumOp::Difference => "-",
            };
            let _ = writeln!(out, "{pad}split  p1 {op} p2");
            let _ = writeln!(out, "{pad}a1     {}", split.left.a);
            let _ = writeln!(out, "{pad}a2     {}", split.right.a);
            let _ = writeln!(out, "{pad}a_max  {}", split.a_max);
            let _ = writeln!(out, "{pad}m1+m2  {}", split.magnitude());
            if split.a_max.is_zero() {
                let _ = writeln!(out, "{pad}exact: both sides are error free, no filter needed");
            } else {
                let c = compute_constants(&split.a_max, params)?;
                float_line(out, &format!("{pad}a3"), c.a3);
                float_line(out, &format!("{pad}a4"), c.a4);
                let _ = writeln!(out, "{pad}a4/eps {}", c.a4 / params.epsilon());
            }
        }
        TopSplit::NotSumLike => match e {
            Expr::Product(l, r) => {
                let _ = writeln!(out, "{pad}product: the filter multiplies the factor signs");
                describe(out, l, ufp, params, indent + 2)?;
                describe(out, r, ufp, params, indent + 2)?;
            }
            _ => {
                let _ = writeln!(out, "{pad}leaf: evaluated exactly");
            }
        },
    }
    Ok(())
}

/// Human-readable error bound and filter constants for binary64.
pub fn derive_report(e: &Expr, ufp: bool) -> Result<String, DeriveError> {
    let params = FpnParams::binary64();
    let mut out = String::new();
    let _ = writeln!(out, "format binary64 (p={}), ufp={}", params.precision(), ufp);
    let _ = writeln!(out, "phi    {}", phi(&params));
    describe(&mut out, e, ufp, &params, 0)?;
    Ok(out)
}
