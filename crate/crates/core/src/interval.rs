//! Outward-rounded interval arithmetic without switching rounding modes.
//!
//! Each endpoint is computed in round-to-nearest and the error-free
//! residual tells which way it was rounded, so only an endpoint that was
//! rounded inward moves one float outward. Products whose residual is not
//! exact (underflow range) are pushed a float plus `u_S` both ways.

use crate::expansion::{checked_two_product, two_sum};
use crate::expr::tape::{Instr, Tape};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const U_S: f64 = f64::from_bits(1);

impl Interval {
    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Largest magnitude in the interval.
    pub fn mag(&self) -> f64 {
        let (a, b) = (self.lo.abs(), self.hi.abs());
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval {
            lo: sum_down(self.lo, o.lo),
            hi: sum_up(self.hi, o.hi),
        }
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval {
            lo: sum_down(self.lo, -o.hi),
            hi: sum_up(self.hi, -o.lo),
        }
    }

    /// Callers must check finiteness of the result; with non-finite
    /// operands the endpoints are meaningless.
    pub fn mul(self, o: Interval) -> Interval {
        let c = [
            prod(self.lo, o.lo),
            prod(self.lo, o.hi),
            prod(self.hi, o.lo),
            prod(self.hi, o.hi),
        ];
        let mut r = c[0];
        for x in &c[1..] {
            if x.0 < r.0 {
                r.0 = x.0;
            }
            if x.1 > r.1 {
                r.1 = x.1;
            }
        }
        Interval { lo: r.0, hi: r.1 }
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Interval {
                lo: -self.hi,
                hi: -self.lo,
            }
        } else {
            Interval {
                lo: 0.0,
                hi: self.mag(),
            }
        }
    }
}

// A NaN residual (overflow) leaves the infinite sum as is, and the caller
// rejects it.
#[inline]
fn sum_down(a: f64, b: f64) -> f64 {
    let (s, t) = two_sum(a, b);
    if t < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn sum_up(a: f64, b: f64) -> f64 {
    let (s, t) = two_sum(a, b);
    if t > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
fn prod(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 || b == 0.0 {
        return (0.0, 0.0);
    }
    match checked_two_product(a, b) {
        Ok((p, e)) => (
            if e < 0.0 { p.next_down() } else { p },
            if e > 0.0 { p.next_up() } else { p },
        ),
        Err(_) => {
            let p = a * b;
            (p.next_down() - U_S, p.next_up() + U_S)
        }
    }
}

/// Evaluates a tape over intervals. Returns `false` as soon as any endpoint
/// becomes non-finite; the registers are then unspecified.
pub(crate) fn run_tape(tape: &Tape, inputs: &[Interval], regs: &mut [Interval]) -> bool {
    for (i, ins) in tape.instrs().iter().enumerate() {
        let r = match *ins {
            Instr::Input(k) => inputs[k as usize],
            Instr::Const(c) => Interval::point(c),
            Instr::Add(a, b) => regs[a as usize].add(regs[b as usize]),
            Instr::Sub(a, b) => regs[a as usize].sub(regs[b as usize]),
            Instr::Mul(a, b) => regs[a as usize].mul(regs[b as usize]),
            Instr::Abs(a) => regs[a as usize].abs(),
        };
        if !r.is_finite() {
            return false;
        }
        regs[i] = r;
    }
    true
}

/// Scratch interval registers on the stack for small programs.
#[inline]
pub(crate) fn with_interval_registers<R>(n: usize, f: impl FnOnce(&mut [Interval]) -> R) -> R {
    const Z: Interval = Interval { lo: 0.0, hi: 0.0 };
    if n <= 64 {
        let mut buf = [Z; 64];
        f(&mut buf[..n])
    } else if n <= 256 {
        let mut buf = [Z; 256];
        f(&mut buf[..n])
    } else {
        let mut buf = vec![Z; n];
        f(&mut buf)
    }
}
