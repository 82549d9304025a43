//! Flat register programs for fast repeated evaluation.
//!
//! A tape evaluates exactly the same rounded operations as the tree it was
//! built from. Identical instructions are shared, which never changes a
//! result because every instruction is a pure function of its operands.

use std::collections::HashMap;

use super::Expr;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Instr {
    Input(u32),
    Const(f64),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Abs(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Input(u32),
    Const(u64),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Abs(u32),
}

impl From<Instr> for Key {
    fn from(i: Instr) -> Key {
        match i {
            Instr::Input(k) => Key::Input(k),
            Instr::Const(c) => Key::Const(c.to_bits()),
            Instr::Add(a, b) => Key::Add(a, b),
            Instr::Sub(a, b) => Key::Sub(a, b),
            Instr::Mul(a, b) => Key::Mul(a, b),
            Instr::Abs(a) => Key::Abs(a),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Tape {
    instrs: Vec<Instr>,
    memo: HashMap<Key, u32>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    pub fn push(&mut self, instr: Instr) -> u32 {
        let key = Key::from(instr);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let r = self.instrs.len() as u32;
        self.instrs.push(instr);
        self.memo.insert(key, r);
        r
    }

    /// Appends the tree's operations and returns the register of its root.
    pub fn expr(&mut self, e: &Expr) -> u32 {
        match e {
            Expr::Constant(c) => self.push(Instr::Const(*c)),
            Expr::Input(i) => self.push(Instr::Input(*i as u32 - 1)),
            Expr::Sum(l, r) => {
                let (a, b) = (self.expr(l), self.expr(r));
                self.push(Instr::Add(a, b))
            }
            Expr::Difference(l, r) => {
                let (a, b) = (self.expr(l), self.expr(r));
                self.push(Instr::Sub(a, b))
            }
            Expr::Product(l, r) => {
                let (a, b) = (self.expr(l), self.expr(r));
                self.push(Instr::Mul(a, b))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    #[inline]
    pub fn run(&self, inputs: &[f64], regs: &mut [f64]) {
        for (i, ins) in self.instrs.iter().enumerate() {
            regs[i] = match *ins {
                Instr::Input(k) => inputs[k as usize],
                Instr::Const(c) => c,
                Instr::Add(a, b) => regs[a as usize] + regs[b as usize],
                Instr::Sub(a, b) => regs[a as usize] - regs[b as usize],
                Instr::Mul(a, b) => regs[a as usize] * regs[b as usize],
                Instr::Abs(a) => regs[a as usize].abs(),
            };
        }
    }

    /// Runs the tape and hands the register file to `f`.
    #[inline]
    pub fn with_run<R>(&self, inputs: &[f64], f: impl FnOnce(&[f64]) -> R) -> R {
        with_registers(self.len(), |regs| {
            self.run(inputs, regs);
            f(regs)
        })
    }
}

/// Scratch space on the stack for small programs, on the heap otherwise.
#[inline]
pub(crate) fn with_registers<R>(n: usize, f: impl FnOnce(&mut [f64]) -> R) -> R {
    if n <= 32 {
        let mut buf = [0.0; 32];
        f(&mut buf[..n])
    } else if n <= 128 {
        let mut buf = [0.0; 128];
        f(&mut buf[..n])
    } else if n <= 512 {
        let mut buf = [0.0; 512];
        f(&mut buf[..n])
    } else {
        let mut buf = vec![0.0; n];
        f(&mut buf)
    }
}
