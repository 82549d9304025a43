//! Expression trees for polynomials and their floating-point realisations.
//!
//! One [`Expr`] plays two roles. Read with exact operations it is a real
//! polynomial `p`; read with rounded binary64 operations, in exactly the
//! association order of the tree, it is the realisation `p̃`. Nothing in this
//! crate ever reassociates or simplifies a tree.

mod parse;
pub(crate) mod tape;

pub use parse::{format_hex_f64, parse_expr, parse_f64_literal, ParseError};

use std::fmt;
use std::ops::{Add, Mul, Sub};

/// A polynomial expression over binary64 constants and input placeholders.
///
/// Inputs are 1-based: `Input(1)` is the placeholder `_1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Constant(f64),
    Input(usize),
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
}

/// The two additive operators a realisation can end in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumOp {
    Sum,
    Difference,
}

/// Result of [`Expr::top_decomposition`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TopSplit<'a> {
    SumLike {
        left: &'a Expr,
        right: &'a Expr,
        op: SumOp,
    },
    NotSumLike,
}

impl Expr {
    pub fn input(index: usize) -> Expr {
        assert!(index >= 1, "placeholders are numbered from 1");
        Expr::Input(index)
    }

    pub fn constant(value: f64) -> Expr {
        assert!(value.is_finite(), "constants must be finite");
        Expr::Constant(value)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Constant(_) | Expr::Input(_))
    }

    /// Both children of a binary node.
    pub fn children(&self) -> Option<(&Expr, &Expr)> {
        match self {
            Expr::Sum(l, r) | Expr::Difference(l, r) | Expr::Product(l, r) => Some((l, r)),
            Expr::Constant(_) | Expr::Input(_) => None,
        }
    }

    /// `Some(op)` for the atom-on-atom forms `x ⊕ y` and `x ⊖ y`.
    pub fn as_atom_sum(&self) -> Option<(SumOp, &Expr, &Expr)> {
        match self {
            Expr::Sum(l, r) if l.is_leaf() && r.is_leaf() => Some((SumOp::Sum, l, r)),
            Expr::Difference(l, r) if l.is_leaf() && r.is_leaf() => {
                Some((SumOp::Difference, l, r))
            }
            _ => None,
        }
    }

    /// Largest placeholder index, 0 if the expression has no inputs.
    pub fn max_input_index(&self) -> usize {
        match self {
            Expr::Constant(_) => 0,
            Expr::Input(i) => *i,
            Expr::Sum(l, r) | Expr::Difference(l, r) | Expr::Product(l, r) => {
                l.max_input_index().max(r.max_input_index())
            }
        }
    }

    fn collect_inputs(&self, seen: &mut Vec<bool>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Input(i) => {
                if seen.len() < *i {
                    seen.resize(*i, false);
                }
                seen[*i - 1] = true;
            }
            Expr::Sum(l, r) | Expr::Difference(l, r) | Expr::Product(l, r) => {
                l.collect_inputs(seen);
                r.collect_inputs(seen);
            }
        }
    }

    /// Number of inputs, after checking that placeholders `_1.._n` all occur.
    pub fn arity(&self) -> Result<usize, ParseError> {
        let mut seen = Vec::new();
        self.collect_inputs(&mut seen);
        match seen.iter().position(|s| !s) {
            Some(missing) => Err(ParseError::PlaceholderGap {
                missing: missing + 1,
                max: seen.len(),
            }),
            None => Ok(seen.len()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self.children() {
            None => 1,
            Some((l, r)) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Pre-order walk over all subexpressions, the root first.
    pub fn subexpressions(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            out.push(e);
            if let Some((l, r)) = e.children() {
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }

    /// Evaluates the realisation with IEEE 754 binary64 round-to-nearest,
    /// one rounding per node, in tree order. Non-finite values propagate.
    pub fn eval_naive(&self, inputs: &[f64]) -> f64 {
        match self {
            Expr::Constant(c) => *c,
            Expr::Input(i) => inputs[*i - 1],
            Expr::Sum(l, r) => l.eval_naive(inputs) + r.eval_naive(inputs),
            Expr::Difference(l, r) => l.eval_naive(inputs) - r.eval_naive(inputs),
            Expr::Product(l, r) => l.eval_naive(inputs) * r.eval_naive(inputs),
        }
    }

    pub fn top_decomposition(&self) -> TopSplit<'_> {
        match self {
            Expr::Sum(left, right) => TopSplit::SumLike {
                left,
                right,
                op: SumOp::Sum,
            },
            Expr::Difference(left, right) => TopSplit::SumLike {
                left,
                right,
                op: SumOp::Difference,
            },
            _ => TopSplit::NotSumLike,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(..) | Expr::Difference(..) => 1,
            Expr::Product(..) => 2,
            // A leading minus binds like a binary one when printed.
            Expr::Constant(c) if c.is_sign_negative() => 1,
            Expr::Constant(_) | Expr::Input(_) => 3,
        }
    }
}

impl fmt::Display for Expr {
    /// Prints in the parser's grammar with only the parentheses needed to
    /// pin the tree's association order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) => write!(f, "{c:?}"),
            Expr::Input(i) => write!(f, "_{i}"),
            Expr::Sum(l, r) | Expr::Difference(l, r) | Expr::Product(l, r) => {
                let (op, prec) = match self {
                    Expr::Sum(..) => (" + ", 1),
                    Expr::Difference(..) => (" - ", 1),
                    _ => ("*", 2),
                };
                if l.precedence() < prec {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                f.write_str(op)?;
                if r.precedence() <= prec {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl Add for Expr {
    type Output = Expr;

    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(Box::new(self), Box::new(rhs))
    }
}

impl Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        Expr::Difference(Box::new(self), Box::new(rhs))
    }
}

impl Mul for Expr {
    type Output = Expr;

    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(Box::new(self), Box::new(rhs))
    }
}
