use super::{FilterOutcome, Stage};
use crate::expansion::{self, two_sum, RangeError};
use crate::expr::tape::{Instr, Tape};
use crate::expr::Expr;

/// Certifies realisations built on input differences `x_i ⊖ x_j` once
/// every such difference turns out to be exact, then finishes the
/// translated polynomial in expansion arithmetic.
///
/// Expressions with a leaf outside such a difference are not in translated
/// form; the stage then always gives up.
#[derive(Clone, Debug)]
pub struct TranslationFilter {
    tape: Tape,
    root: u32,
    differences: Vec<(u32, u32)>,
    applicable: bool,
}

fn translated_form(e: &Expr) -> bool {
    match e {
        Expr::Difference(l, r) if l.is_leaf() && r.is_leaf() => true,
        Expr::Constant(_) | Expr::Input(_) => false,
        Expr::Sum(l, r) | Expr::Difference(l, r) | Expr::Product(l, r) => {
            translated_form(l) && translated_form(r)
        }
    }
}

impl TranslationFilter {
    pub fn new(e: &Expr) -> TranslationFilter {
        let mut tape = Tape::new();
        let root = tape.expr(e);
        let instrs = tape.instrs();
        let is_leaf = |r: u32| matches!(instrs[r as usize], Instr::Input(_) | Instr::Const(_));
        let differences = instrs
            .iter()
            .filter_map(|i| match *i {
                Instr::Sub(a, b) if is_leaf(a) && is_leaf(b) => Some((a, b)),
                _ => None,
            })
            .collect();
        TranslationFilter {
            applicable: translated_form(e),
            tape,
            root,
            differences,
        }
    }

    pub fn is_applicable(&self) -> bool {
        self.applicable
    }

    fn leaf(&self, r: u32, inputs: &[f64]) -> f64 {
        match self.tape.instrs()[r as usize] {
            Instr::Input(k) => inputs[k as usize],
            Instr::Const(c) => c,
            _ => unreachable!("differences are taken between leaves"),
        }
    }
}

impl Stage for TranslationFilter {
    fn name(&self) -> &str {
        "translation"
    }

    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        if !self.applicable {
            return FilterOutcome::Uncertain;
        }
        for &(a, b) in &self.differences {
            let (s, t) = two_sum(self.leaf(a, inputs), -self.leaf(b, inputs));
            if t != 0.0 || !s.is_finite() {
                return FilterOutcome::Uncertain;
            }
        }
        match expansion::run_tape(&self.tape, inputs) {
            Ok(r) => FilterOutcome::Certain(r[self.root as usize].sign()),
            Err(RangeError) => FilterOutcome::Uncertain,
        }
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}
