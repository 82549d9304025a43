use crate::error_bounds::MagnitudeExpr;
use crate::expr::tape::{Instr, Tape};
use crate::expr::Expr;

/// Runs `tape` and reports whether any operation underflowed: a sum or
/// product with a subnormal result, or a product of nonzero factors that
/// rounded to zero.
pub(crate) fn tape_underflows(tape: &Tape, inputs: &[f64]) -> bool {
    let mut regs = vec![0.0; tape.len()];
    let mut hit = false;
    for (i, ins) in tape.instrs().iter().enumerate() {
        let (v, zero_product) = match *ins {
            Instr::Input(k) => (inputs[k as usize], false),
            Instr::Const(c) => (c, false),
            Instr::Add(a, b) => (regs[a as usize] + regs[b as usize], false),
            Instr::Sub(a, b) => (regs[a as usize] - regs[b as usize], false),
            Instr::Mul(a, b) => {
                let (x, y) = (regs[a as usize], regs[b as usize]);
                let v = x * y;
                (v, v == 0.0 && x != 0.0 && y != 0.0)
            }
            Instr::Abs(a) => (regs[a as usize].abs(), false),
        };
        let computed = matches!(ins, Instr::Add(..) | Instr::Sub(..) | Instr::Mul(..));
        if computed && (zero_product || v.is_subnormal()) {
            hit = true;
        }
        regs[i] = v;
    }
    hit
}

/// Whether evaluating the realisation `e` or the magnitude `m` underflows
/// anywhere at these inputs.
pub fn underflow_in(e: &Expr, m: &MagnitudeExpr, inputs: &[f64]) -> bool {
    let mut tape = Tape::new();
    tape.expr(e);
    m.compile(&mut tape);
    tape_underflows(&tape, inputs)
}

/// Whether `a · m` underflows.
pub(crate) fn product_underflows(a: f64, m: f64) -> bool {
    let v = a * m;
    v.is_subnormal() || (v == 0.0 && a != 0.0 && m != 0.0)
}
