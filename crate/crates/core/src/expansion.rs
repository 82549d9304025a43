//! Floating-point expansions: exact values as unevaluated sums of
//! nonoverlapping binary64 components, stored in increasing magnitude.
//!
//! Error-free transformations are only error-free while nothing overflows
//! and products stay clear of the subnormal range. Every operation here
//! checks for that and reports [`RangeError`] instead of a wrong answer.

use std::fmt;

use crate::expr::tape::{Instr, Tape};
use crate::expr::Expr;
use crate::filters::{FilterOutcome, Stage};
use crate::fpn::Sign;

/// Products whose rounded value is below this may have an unrepresentable
/// rounding error: `2^-1074 · 2^106`.
const PRODUCT_FLOOR: f64 = f64::from_bits((1023 - 968) << 52);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeError;

impl fmt::Display for RangeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expansion arithmetic left the exact range")
    }
}

impl std::error::Error for RangeError {}

/// `(a ⊕ b, a + b - (a ⊕ b))`.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let x = a + b;
    let bv = x - a;
    let av = x - bv;
    (x, (a - av) + (b - bv))
}

/// Like [`two_sum`] but requires `|a| ≥ |b|` or `a == 0`.
#[inline]
pub fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let x = a + b;
    (x, b - (x - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134217729.0; // 2^27 + 1
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Dekker's product: `(a ⊙ b, a·b - a ⊙ b)` without a fused multiply-add.
#[inline]
pub fn two_product_dekker(a: f64, b: f64) -> (f64, f64) {
    let x = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = x - ah * bh - al * bh - ah * bl;
    (x, al * bl - err)
}

/// The same transformation through a correctly rounded fused multiply-add.
#[inline]
pub fn two_product_fma(a: f64, b: f64) -> (f64, f64) {
    let x = a * b;
    (x, a.mul_add(b, -x))
}

/// Error-free product, fused when the target has hardware FMA.
#[inline]
pub fn two_product(a: f64, b: f64) -> (f64, f64) {
    #[cfg(target_feature = "fma")]
    {
        two_product_fma(a, b)
    }
    #[cfg(not(target_feature = "fma"))]
    {
        two_product_dekker(a, b)
    }
}

/// [`two_product`] restricted to the range where the residual is exact.
#[inline]
pub(crate) fn checked_two_product(a: f64, b: f64) -> Result<(f64, f64), RangeError> {
    let (x, y) = two_product(a, b);
    if !x.is_finite() || !y.is_finite() || (x.abs() < PRODUCT_FLOOR && a != 0.0 && b != 0.0) {
        return Err(RangeError);
    }
    Ok((x, y))
}

#[derive(Clone, PartialEq)]
pub struct Expansion {
    /// Nonzero components in increasing magnitude; empty for zero.
    comps: Vec<f64>,
}

impl Expansion {
    pub fn zero() -> Expansion {
        Expansion { comps: Vec::new() }
    }

    pub fn from_f64(x: f64) -> Expansion {
        debug_assert!(x.is_finite());
        let comps = if x == 0.0 { Vec::new() } else { vec![x] };
        Expansion { comps }
    }

    /// Builds from components that are already valid, dropping zeros.
    pub fn from_components(comps: &[f64]) -> Expansion {
        Expansion {
            comps: comps.iter().copied().filter(|&c| c != 0.0).collect(),
        }
    }

    /// The components, with `[0]` standing for zero.
    pub fn components(&self) -> &[f64] {
        if self.comps.is_empty() {
            &[0.0]
        } else {
            &self.comps
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// The most significant component decides.
    pub fn sign(&self) -> Sign {
        match self.comps.last() {
            None => Sign::Zero,
            Some(&c) => Sign::of_f64(c).expect("components are finite"),
        }
    }

    /// Rounded sum of the components, largest last.
    pub fn estimate(&self) -> f64 {
        self.comps.iter().sum()
    }

    pub fn neg(&self) -> Expansion {
        Expansion {
            comps: self.comps.iter().map(|c| -c).collect(),
        }
    }

    fn check(comps: Vec<f64>) -> Result<Expansion, RangeError> {
        if comps.iter().all(|c| c.is_finite()) {
            Ok(Expansion { comps })
        } else {
            Err(RangeError)
        }
    }

    /// Exact sum, merging both component lists by magnitude.
    pub fn add(&self, other: &Expansion) -> Result<Expansion, RangeError> {
        let (e, f) = (&self.comps, &other.comps);
        if e.is_empty() {
            return Ok(other.clone());
        }
        if f.is_empty() {
            return Ok(self.clone());
        }
        let mut out = Vec::with_capacity(e.len() + f.len());
        let (mut i, mut j) = (0, 0);
        let next = |i: &mut usize, j: &mut usize| -> f64 {
            if *j >= f.len() || (*i < e.len() && e[*i].abs() < f[*j].abs()) {
                *i += 1;
                e[*i - 1]
            } else {
                *j += 1;
                f[*j - 1]
            }
        };
        let mut q = next(&mut i, &mut j);
        let total = e.len() + f.len();
        if total > 1 {
            let b = next(&mut i, &mut j);
            let (qn, h) = fast_two_sum(b, q);
            q = qn;
            if h != 0.0 {
                out.push(h);
            }
            for _ in 2..total {
                let b = next(&mut i, &mut j);
                let (qn, h) = two_sum(q, b);
                q = qn;
                if h != 0.0 {
                    out.push(h);
                }
            }
        }
        if q != 0.0 {
            out.push(q);
        }
        Expansion::check(out)
    }

    pub fn sub(&self, other: &Expansion) -> Result<Expansion, RangeError> {
        self.add(&other.neg())
    }

    /// Exact product with one float.
    pub fn scale(&self, b: f64) -> Result<Expansion, RangeError> {
        if self.comps.is_empty() || b == 0.0 {
            return Ok(Expansion::zero());
        }
        let mut out = Vec::with_capacity(2 * self.comps.len());
        let (mut q, h) = checked_two_product(self.comps[0], b)?;
        if h != 0.0 {
            out.push(h);
        }
        for &c in &self.comps[1..] {
            let (p1, p0) = checked_two_product(c, b)?;
            let (sum, h) = two_sum(q, p0);
            if h != 0.0 {
                out.push(h);
            }
            let (qn, h) = fast_two_sum(p1, sum);
            q = qn;
            if h != 0.0 {
                out.push(h);
            }
        }
        if q != 0.0 {
            out.push(q);
        }
        Expansion::check(out)
    }

    /// Exact product: the sum of `self` scaled by each component of `other`.
    pub fn mul(&self, other: &Expansion) -> Result<Expansion, RangeError> {
        let (a, b) = if self.comps.len() >= other.comps.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Expansion::zero();
        for &c in &b.comps {
            acc = acc.add(&a.scale(c)?)?;
        }
        Ok(acc)
    }

    /// Checks ordering and nonoverlap: each component lies below the lowest
    /// set bit of the next.
    pub fn is_valid(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite() && *c != 0.0)
            && self.comps.windows(2).all(|w| w[0].abs() < lowest_bit(w[1]))
    }
}

/// Value of the lowest set bit of a nonzero finite float.
fn lowest_bit(x: f64) -> f64 {
    let bits = x.abs().to_bits();
    let exp = (bits >> 52) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let tz = m.trailing_zeros() as i64;
    crate::fpn::pow2((e + tz) as i32)
}

impl fmt::Debug for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.components()).finish()
    }
}

pub(crate) fn run_tape(tape: &Tape, inputs: &[f64]) -> Result<Vec<Expansion>, RangeError> {
    let mut regs: Vec<Expansion> = Vec::with_capacity(tape.len());
    for ins in tape.instrs() {
        let v = match *ins {
            Instr::Input(k) => {
                let x = inputs[k as usize];
                if !x.is_finite() {
                    return Err(RangeError);
                }
                Expansion::from_f64(x)
            }
            Instr::Const(c) => Expansion::from_f64(c),
            Instr::Add(a, b) => sum_of(&regs, a, b, false)?,
            Instr::Sub(a, b) => sum_of(&regs, a, b, true)?,
            Instr::Mul(a, b) => regs[a as usize].mul(&regs[b as usize])?,
            Instr::Abs(a) => {
                let x = &regs[a as usize];
                if x.sign() == Sign::Negative {
                    x.neg()
                } else {
                    x.clone()
                }
            }
        };
        regs.push(v);
    }
    Ok(regs)
}

fn sum_of(regs: &[Expansion], a: u32, b: u32, negate: bool) -> Result<Expansion, RangeError> {
    let (x, y) = (&regs[a as usize], &regs[b as usize]);
    // Two single floats: one two-sum is the whole story.
    if x.comps.len() <= 1 && y.comps.len() <= 1 {
        let xv = x.comps.first().copied().unwrap_or(0.0);
        let yv = y.comps.first().copied().unwrap_or(0.0);
        let (s, t) = two_sum(xv, if negate { -yv } else { yv });
        if !s.is_finite() || !t.is_finite() {
            return Err(RangeError);
        }
        return Ok(Expansion::from_components(&[t, s]));
    }
    if negate {
        x.sub(y)
    } else {
        x.add(y)
    }
}

/// Exact evaluation of `e` over expansions.
pub fn eval_expansion(e: &Expr, inputs: &[f64]) -> Result<Expansion, RangeError> {
    let mut tape = Tape::new();
    let root = tape.expr(e);
    run_tape(&tape, inputs).map(|mut r| r.swap_remove(root as usize))
}

/// Sign of `e` by exact expansion evaluation; `Uncertain` on range failure.
pub fn exact_sign_expansion(e: &Expr, inputs: &[f64]) -> FilterOutcome {
    match eval_expansion(e, inputs) {
        Ok(x) => FilterOutcome::Certain(x.sign()),
        Err(RangeError) => FilterOutcome::Uncertain,
    }
}

/// [`exact_sign_expansion`] as a stage, with the tape built once.
#[derive(Clone, Debug)]
pub struct ExpansionStage {
    tape: Tape,
    root: u32,
}

impl ExpansionStage {
    pub fn new(e: &Expr) -> ExpansionStage {
        let mut tape = Tape::new();
        let root = tape.expr(e);
        ExpansionStage { tape, root }
    }
}

impl Stage for ExpansionStage {
    fn name(&self) -> &str {
        "expansion"
    }

    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        match run_tape(&self.tape, inputs) {
            Ok(r) => FilterOutcome::Certain(r[self.root as usize].sign()),
            Err(RangeError) => FilterOutcome::Uncertain,
        }
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpn::{oracle_value, pow2, Dyadic};
    use crate::predicates::Builtin;
    use proptest::prelude::*;

    fn d(x: f64) -> Dyadic {
        Dyadic::from_f64(x).unwrap()
    }

    fn value(x: &Expansion) -> Dyadic {
        x.components().iter().fold(Dyadic::zero(), |acc, &c| acc + d(c))
    }

    #[test]
    fn two_sum_examples() {
        assert_eq!(two_sum(pow2(53), 1.0), (pow2(53), 1.0));
        assert_eq!(two_sum(1.0, 1.0), (2.0, 0.0));
    }

    #[test]
    fn two_product_example() {
        let a = pow2(27) + 1.0;
        let expected = (pow2(54) + pow2(28), 1.0);
        assert_eq!(two_product(a, a), expected);
        assert_eq!(two_product_dekker(a, a), expected);
        assert_eq!(two_product_fma(a, a), expected);
    }

    #[test]
    fn expansion_examples() {
        let one = Expansion::from_f64(1.0);
        let tiny = Expansion::from_f64(pow2(-60));
        assert_eq!(one.add(&tiny).unwrap().components(), &[pow2(-60), 1.0]);
        let x = Expansion::from_components(&[pow2(-60), 1.0]);
        assert_eq!(x.scale(0.0).unwrap().components(), &[0.0]);
        let p = Expansion::from_f64(3.0).mul(&Expansion::from_f64(5.0)).unwrap();
        assert_eq!(p.components(), &[15.0]);
    }

    #[test]
    fn sign_examples() {
        assert_eq!(Expansion::from_components(&[-pow2(-1000), 1.0]).sign(), Sign::Positive);
        assert_eq!(Expansion::zero().sign(), Sign::Zero);
        assert_eq!(
            Expansion::from_components(&[pow2(-1074), -pow2(-500)]).sign(),
            Sign::Negative
        );
    }

    #[test]
    fn predicate_examples() {
        let o = Builtin::Orient2d.expr();
        let (s, l) = (pow2(-801), pow2(-800));
        // The exact value 2^-1602 is far below the smallest subnormal, so
        // no expansion can hold it; the stage must give up.
        assert_eq!(exact_sign_expansion(&o, &[s, s, l, l, s, l]), FilterOutcome::Uncertain);
        let b = pow2(800);
        assert_eq!(exact_sign_expansion(&o, &[b, b, b, b, 0.0, 0.0]), FilterOutcome::Uncertain);
        let ic = Builtin::Incircle2d.expr();
        assert_eq!(
            exact_sign_expansion(&ic, &[0.0, 0.0, 2.0, 0.0, 2.0, 2.0, 0.0, 2.0]),
            FilterOutcome::Certain(Sign::Zero)
        );
        assert_eq!(
            exact_sign_expansion(&o, &[-0.01, -0.59, 0.01, 0.57, 0.0, -0.01]).sign(),
            Some(oracle_value(&o, &[-0.01, -0.59, 0.01, 0.57, 0.0, -0.01]).unwrap().sign())
        );
    }

    #[test]
    fn stage_matches_function() {
        let o = Builtin::Orient2d.expr();
        let st = ExpansionStage::new(&o);
        let x = [0.1, 0.3, 0.7, 0.2, -0.4, 0.9];
        assert_eq!(st.apply(&x), exact_sign_expansion(&o, &x));
        assert_eq!(st.apply(&[f64::NAN; 6]), FilterOutcome::Uncertain);
    }

    fn wide() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e6..1e6f64,
            any::<u64>().prop_map(f64::from_bits).prop_filter("finite", |x| x.is_finite()),
            (any::<i32>(), -1074..-900i32).prop_map(|(m, e)| m as f64 * pow2(e.max(-1074))),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn error_free_transformations(a in wide(), b in wide()) {
            let (s, t) = two_sum(a, b);
            if s.is_finite() && t.is_finite() {
                prop_assert_eq!(d(s) + d(t), d(a) + d(b));
            }
            if let Ok((p, q)) = checked_two_product(a, b) {
                prop_assert_eq!(d(p) + d(q), d(a) * d(b));
                let dekker = two_product_dekker(a, b);
                // Splitting overflows for huge factors; that is a range
                // failure of its own, not a disagreement.
                if dekker.1.is_finite() {
                    prop_assert_eq!(dekker, two_product_fma(a, b));
                }
            }
        }

        #[test]
        fn operations_are_exact_and_valid(
            xs in proptest::collection::vec(-1e3..1e3f64, 1..6),
            ys in proptest::collection::vec(-1e3..1e3f64, 1..6),
        ) {
            let sum = |v: &[f64]| v.iter().try_fold(Expansion::zero(), |acc, &c| acc.add(&Expansion::from_f64(c))).unwrap();
            let (x, y) = (sum(&xs), sum(&ys));
            prop_assert!(x.is_valid() && y.is_valid());
            let s = x.add(&y).unwrap();
            prop_assert!(s.is_valid());
            prop_assert_eq!(value(&s), value(&x) + value(&y));
            let p = x.mul(&y).unwrap();
            prop_assert!(p.is_valid());
            prop_assert_eq!(value(&p), value(&x) * value(&y));
            let q = x.sub(&x).unwrap();
            prop_assert!(q.is_zero());
        }
    }
}
