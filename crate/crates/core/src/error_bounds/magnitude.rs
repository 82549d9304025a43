use std::fmt;

use crate::expr::tape::{Instr, Tape};
use crate::expr::Expr;

/// What a constant in a magnitude expression stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MagRole {
    UNormal,
    USubnormal,
    Literal,
}

/// The runtime half of an error bound: an expression over `|q̃|` for
/// subexpressions `q̃`, constants, `⊕` and `⊙`.
///
/// All operations round to nearest, exactly like the realisation itself.
#[derive(Clone, Debug, PartialEq)]
pub enum MagnitudeExpr {
    AbsOf(Expr),
    Const { value: f64, role: MagRole },
    Sum(Box<MagnitudeExpr>, Box<MagnitudeExpr>),
    Product(Box<MagnitudeExpr>, Box<MagnitudeExpr>),
}

impl MagnitudeExpr {
    pub fn abs_of(e: &Expr) -> MagnitudeExpr {
        MagnitudeExpr::AbsOf(e.clone())
    }

    pub fn literal(value: f64) -> MagnitudeExpr {
        MagnitudeExpr::Const {
            value,
            role: MagRole::Literal,
        }
    }

    pub fn u_normal(value: f64) -> MagnitudeExpr {
        MagnitudeExpr::Const {
            value,
            role: MagRole::UNormal,
        }
    }

    pub fn sum(l: MagnitudeExpr, r: MagnitudeExpr) -> MagnitudeExpr {
        MagnitudeExpr::Sum(Box::new(l), Box::new(r))
    }

    pub fn product(l: MagnitudeExpr, r: MagnitudeExpr) -> MagnitudeExpr {
        MagnitudeExpr::Product(Box::new(l), Box::new(r))
    }

    pub fn eval(&self, inputs: &[f64]) -> f64 {
        match self {
            MagnitudeExpr::AbsOf(e) => e.eval_naive(inputs).abs(),
            MagnitudeExpr::Const { value, .. } => *value,
            MagnitudeExpr::Sum(l, r) => l.eval(inputs) + r.eval(inputs),
            MagnitudeExpr::Product(l, r) => l.eval(inputs) * r.eval(inputs),
        }
    }

    /// Appends the evaluation to a tape, sharing registers with any
    /// realisation already on it.
    pub(crate) fn compile(&self, tape: &mut Tape) -> u32 {
        match self {
            MagnitudeExpr::AbsOf(e) => {
                let r = tape.expr(e);
                tape.push(Instr::Abs(r))
            }
            MagnitudeExpr::Const { value, .. } => tape.push(Instr::Const(*value)),
            MagnitudeExpr::Sum(l, r) => {
                let (a, b) = (l.compile(tape), r.compile(tape));
                tape.push(Instr::Add(a, b))
            }
            MagnitudeExpr::Product(l, r) => {
                let (a, b) = (l.compile(tape), r.compile(tape));
                tape.push(Instr::Mul(a, b))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            MagnitudeExpr::Sum(..) => 1,
            MagnitudeExpr::Product(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for MagnitudeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MagnitudeExpr::AbsOf(e) => write!(f, "|{e}|"),
            MagnitudeExpr::Const {
                role: MagRole::UNormal,
                ..
            } => f.write_str("u_N"),
            MagnitudeExpr::Const {
                role: MagRole::USubnormal,
                ..
            } => f.write_str("u_S"),
            MagnitudeExpr::Const { value, .. } => write!(f, "{value:?}"),
            MagnitudeExpr::Sum(l, r) | MagnitudeExpr::Product(l, r) => {
                let (op, prec) = match self {
                    MagnitudeExpr::Sum(..) => (" + ", 1),
                    _ => ("*", 2),
                };
                for (i, side) in [l, r].into_iter().enumerate() {
                    if i == 1 {
                        f.write_str(op)?;
                    }
                    let needs = if i == 0 {
                        side.precedence() < prec
                    } else {
                        side.precedence() <= prec
                    };
                    if needs {
                        write!(f, "({side})")?;
                    } else {
                        write!(f, "{side}")?;
                    }
                }
                Ok(())
            }
        }
    }
}
