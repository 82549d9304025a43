//! Forward error bounds for floating-point realisations.
//!
//! A bound `(a, m)` for a realisation `q̃` of `q` promises
//! `|q̃ - q| ≤ a(ε)·m` and `|q̃| ≤ m` (plus, in the underflow-protected
//! variant, `q̃ == q` or `m ≥ u_N`). Bounds are built bottom-up by a list of
//! rules; the first rule that applies to a node wins.

mod eps_poly;
mod magnitude;

pub use eps_poly::EpsPoly;
pub use magnitude::{MagRole, MagnitudeExpr};

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::expr::{Expr, SumOp};
use crate::fpn::{Dyadic, FpnParams, Rounded, Sign};
use crate::interval::{self, Interval};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeriveError {
    #[error("coefficient {coefficient} is not below 1/ε; lexicographic comparison is unsound")]
    CoefficientTooLarge { coefficient: String },
    #[error("filter constant overflows the floating-point range")]
    ConstantOverflow,
    #[error("no rule applies to `{expr}`")]
    NoApplicableRule { expr: String },
    #[error("invalid bounds for input {index}: [{lo}, {hi}]")]
    InvalidBounds { index: usize, lo: f64, hi: f64 },
    #[error("`{expr}` does not end in a sum or difference")]
    NotSumLike { expr: String },
    #[error("expected {expected} bounds, got {got}")]
    BoundsArity { expected: usize, got: usize },
}

/// `2·⌊(√(4/ε + 45) - 1)/4⌋`, with an exact integer square root.
pub fn phi(params: &FpnParams) -> u64 {
    let n = (BigUint::from(1u32) << (params.precision() + 2)) + 45u32;
    let s = n.sqrt();
    // ⌊(√n - 1)/4⌋ == ⌊(⌊√n⌋ - 1)/4⌋ because the floor of a monotone
    // function of √n only changes at integers.
    let q: BigUint = (s - 1u32) / 4u32;
    2 * u64::try_from(q).expect("φ fits in 64 bits for any sane precision")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBound {
    pub a: EpsPoly,
    pub m: MagnitudeExpr,
    pub ufp: bool,
}

/// Everything a rule may need: the map being computed and a way to bound
/// subexpressions with the full rule set.
pub struct RuleContext<'a> {
    rules: &'a RuleSet,
    pub ufp: bool,
    pub params: &'a FpnParams,
}

impl RuleContext<'_> {
    pub fn derive(&self, e: &Expr) -> Result<ErrorBound, DeriveError> {
        self.rules.derive_with(e, self)
    }

    /// `m ⊕ u_N` in the underflow-protected map, `m` otherwise.
    pub fn with_u_normal(&self, m: MagnitudeExpr) -> MagnitudeExpr {
        if self.ufp {
            MagnitudeExpr::sum(m, MagnitudeExpr::u_normal(self.params.u_normal()))
        } else {
            m
        }
    }
}

/// One error-bound rule. `apply` returns `None` when the rule does not
/// apply to `e`.
pub trait Rule: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    fn apply(&self, e: &Expr, cx: &RuleContext<'_>) -> Option<Result<ErrorBound, DeriveError>>;
}

/// The seven standard rules, in their order of precedence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardRule {
    Constant,
    Input,
    AtomSum,
    AtomProduct,
    AtomSumProduct,
    Sum,
    Product,
}

impl StandardRule {
    pub const ALL: [StandardRule; 7] = [
        StandardRule::Constant,
        StandardRule::Input,
        StandardRule::AtomSum,
        StandardRule::AtomProduct,
        StandardRule::AtomSumProduct,
        StandardRule::Sum,
        StandardRule::Product,
    ];
}

fn bound(a: EpsPoly, m: MagnitudeExpr, cx: &RuleContext<'_>) -> Option<Result<ErrorBound, DeriveError>> {
    Some(Ok(ErrorBound { a, m, ufp: cx.ufp }))
}

impl Rule for StandardRule {
    fn name(&self) -> &str {
        match self {
            StandardRule::Constant => "R1",
            StandardRule::Input => "R2",
            StandardRule::AtomSum => "R3",
            StandardRule::AtomProduct => "R4",
            StandardRule::AtomSumProduct => "R5",
            StandardRule::Sum => "R6",
            StandardRule::Product => "R7",
        }
    }

    fn apply(&self, e: &Expr, cx: &RuleContext<'_>) -> Option<Result<ErrorBound, DeriveError>> {
        let abs = || MagnitudeExpr::abs_of(e);
        match (self, e) {
            (StandardRule::Constant, Expr::Constant(c)) => {
                bound(EpsPoly::zero(), MagnitudeExpr::literal(c.abs()), cx)
            }
            (StandardRule::Input, Expr::Input(_)) => bound(EpsPoly::zero(), abs(), cx),
            (StandardRule::AtomSum, _) if e.as_atom_sum().is_some() => {
                bound(EpsPoly::epsilon(), abs(), cx)
            }
            (StandardRule::AtomProduct, Expr::Product(l, r)) if l.is_leaf() && r.is_leaf() => {
                bound(EpsPoly::epsilon(), cx.with_u_normal(abs()), cx)
            }
            (StandardRule::AtomSumProduct, Expr::Product(l, r))
                if l.as_atom_sum().is_some() && r.as_atom_sum().is_some() =>
            {
                let k = phi(cx.params) as i64 - 14;
                bound(EpsPoly::from_coeffs([3, -k]), cx.with_u_normal(abs()), cx)
            }
            (StandardRule::Sum, Expr::Sum(l, r) | Expr::Difference(l, r)) => Some((|| {
                let (b1, b2) = (cx.derive(l)?, cx.derive(r)?);
                Ok(ErrorBound {
                    a: EpsPoly::combine_sum(&b1.a, &b2.a, cx.params),
                    m: MagnitudeExpr::sum(b1.m, b2.m),
                    ufp: cx.ufp,
                })
            })()),
            (StandardRule::Product, Expr::Product(l, r)) => Some((|| {
                let (b1, b2) = (cx.derive(l)?, cx.derive(r)?);
                Ok(ErrorBound {
                    a: EpsPoly::combine_product(&b1.a, &b2.a),
                    m: cx.with_u_normal(MagnitudeExpr::product(b1.m, b2.m)),
                    ufp: cx.ufp,
                })
            })()),
            _ => None,
        }
    }
}

/// Bounds inputs that are themselves the nearest float to some real value:
/// a leaf `x_i` gets `(ε, |x_i|)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundedInputRule;

impl Rule for RoundedInputRule {
    fn name(&self) -> &str {
        "rounded-input"
    }

    fn apply(&self, e: &Expr, cx: &RuleContext<'_>) -> Option<Result<ErrorBound, DeriveError>> {
        match e {
            Expr::Input(_) => bound(EpsPoly::epsilon(), MagnitudeExpr::abs_of(e), cx),
            _ => None,
        }
    }
}

/// An ordered list of rules.
#[derive(Clone, Debug)]
pub struct RuleSet {
    rules: Vec<Arc<dyn Rule>>,
}

impl RuleSet {
    pub fn new(rules: Vec<Arc<dyn Rule>>) -> RuleSet {
        RuleSet { rules }
    }

    pub fn standard() -> RuleSet {
        RuleSet::new(
            StandardRule::ALL
                .iter()
                .map(|r| Arc::new(*r) as Arc<dyn Rule>)
                .collect(),
        )
    }

    /// The rounded-input rule followed by the general sum and product rules.
    pub fn rounded_input() -> RuleSet {
        RuleSet::new(vec![
            Arc::new(RoundedInputRule),
            Arc::new(StandardRule::Sum),
            Arc::new(StandardRule::Product),
        ])
    }

    pub fn rules(&self) -> &[Arc<dyn Rule>] {
        &self.rules
    }

    pub fn derive(&self, e: &Expr, ufp: bool, params: &FpnParams) -> Result<ErrorBound, DeriveError> {
        let cx = RuleContext {
            rules: self,
            ufp,
            params,
        };
        self.derive_with(e, &cx)
    }

    fn derive_with(&self, e: &Expr, cx: &RuleContext<'_>) -> Result<ErrorBound, DeriveError> {
        self.rules
            .iter()
            .find_map(|r| r.apply(e, cx))
            .unwrap_or_else(|| {
                Err(DeriveError::NoApplicableRule {
                    expr: e.to_string(),
                })
            })
    }
}

impl Default for RuleSet {
    fn default() -> RuleSet {
        RuleSet::standard()
    }
}

/// Error bound under the standard rules.
pub fn derive(e: &Expr, ufp: bool, params: &FpnParams) -> Result<ErrorBound, DeriveError> {
    RuleSet::standard().derive(e, ufp, params)
}

/// The two constants of the semi-static filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConstants {
    pub a3: f64,
    pub a4: f64,
}

fn round_in(x: &Dyadic, params: &FpnParams) -> Result<Dyadic, DeriveError> {
    match x.round_to(params) {
        Rounded::Finite(d) => Ok(d),
        Rounded::Overflow(_) => Err(DeriveError::ConstantOverflow),
    }
}

/// Smallest nonnegative member of the format satisfying a monotone
/// predicate, searching outward from `hint`.
fn smallest_with(
    hint: &Dyadic,
    params: &FpnParams,
    ok: impl Fn(&Dyadic) -> bool,
) -> Result<Dyadic, DeriveError> {
    let mut r = if hint.sign() == Sign::Negative {
        Dyadic::zero()
    } else {
        round_in(hint, params)?
    };
    while !ok(&r) {
        r = r.next_up_in(params).ok_or(DeriveError::ConstantOverflow)?;
    }
    while !r.is_zero() {
        let below = r.next_down_in(params);
        if !ok(&below) {
            break;
        }
        r = below;
    }
    Ok(r)
}

/// `a3`: smallest float with `a3·(1-ε) > a_max(ε)`; `a4`: smallest float
/// with `a4 ≥ a3·(1+ε)²`. All comparisons are exact.
pub fn compute_constants(a_max: &EpsPoly, params: &FpnParams) -> Result<FilterConstants, DeriveError> {
    let a = a_max.eval_at(params);
    let eps = Dyadic::pow2(-(params.precision() as i64));
    let one_minus = Dyadic::one() - eps.clone();
    let one_plus = Dyadic::one() + eps;
    let a3 = smallest_with(&a, params, |r| r * &one_minus > a)?;
    let target = &(&a3 * &one_plus) * &one_plus;
    let a4 = smallest_with(&target, params, |r| *r >= target)?;
    let to_f64 = |d: &Dyadic| d.to_f64_exact().ok_or(DeriveError::ConstantOverflow);
    Ok(FilterConstants {
        a3: to_f64(&a3)?,
        a4: to_f64(&a4)?,
    })
}

/// Upper bound of `m` over a box of inputs, valid for both its exact and its
/// rounded evaluation. Returns `+∞` when the bound overflows.
pub fn staticize(m: &MagnitudeExpr, bounds: &[Interval]) -> Result<f64, DeriveError> {
    for (index, b) in bounds.iter().enumerate() {
        if !(b.is_finite() && b.lo <= b.hi) {
            return Err(DeriveError::InvalidBounds {
                index,
                lo: b.lo,
                hi: b.hi,
            });
        }
    }
    let mut tape = crate::expr::tape::Tape::new();
    let root = m.compile(&mut tape);
    if let Some(needed) = tape.instrs().iter().find_map(|i| match i {
        crate::expr::tape::Instr::Input(k) if *k as usize >= bounds.len() => Some(*k as usize + 1),
        _ => None,
    }) {
        return Err(DeriveError::BoundsArity {
            expected: needed,
            got: bounds.len(),
        });
    }
    Ok(interval::with_interval_registers(tape.len(), |regs| {
        if interval::run_tape(&tape, bounds, regs) {
            regs[root as usize].hi
        } else {
            f64::INFINITY
        }
    }))
}

/// The top-level split of a realisation with the bounds of both parts.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitBound {
    pub left: ErrorBound,
    pub right: ErrorBound,
    pub op: SumOp,
    pub a_max: EpsPoly,
}

impl SplitBound {
    /// `m1 ⊕ m2`.
    pub fn magnitude(&self) -> MagnitudeExpr {
        MagnitudeExpr::sum(self.left.m.clone(), self.right.m.clone())
    }
}

pub fn derive_split(
    rules: &RuleSet,
    left: &Expr,
    right: &Expr,
    op: SumOp,
    ufp: bool,
    params: &FpnParams,
) -> Result<SplitBound, DeriveError> {
    let l = rules.derive(left, ufp, params)?;
    let r = rules.derive(right, ufp, params)?;
    let a_max = EpsPoly::max(&l.a, &r.a, params);
    Ok(SplitBound {
        left: l,
        right: r,
        op,
        a_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, TopSplit};
    use crate::fpn::pow2;
    use crate::predicates::Builtin;

    fn b64() -> FpnParams {
        FpnParams::binary64()
    }

    /// Largest `k` with `k·k ≤ n`, by bisection on u128.
    fn isqrt_oracle(n: u128) -> u128 {
        let (mut lo, mut hi) = (0u128, 1u128 << 64);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if mid * mid <= n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn phi_oracle(p: u32) -> u64 {
        let s = isqrt_oracle((1u128 << (p + 2)) + 45);
        2 * ((s - 1) / 4) as u64
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(&b64()), 94906264);
        assert_eq!(phi(&b64()), phi_oracle(53));
        assert_eq!(isqrt_oracle((1 << 55) + 45), 189812531);
        assert_eq!(phi(&FpnParams::binary32()), phi_oracle(24));
        assert_eq!(phi(&FpnParams::binary32()), 4094);
        let tiny = FpnParams::new(2, -2, 3).unwrap();
        assert_eq!(phi(&tiny), 2);
    }

    #[test]
    fn orient2d_term_bound() {
        let e = Builtin::Orient2d.expr();
        let TopSplit::SumLike { left, .. } = e.top_decomposition() else {
            panic!()
        };
        let b = derive(left, false, &b64()).unwrap();
        assert_eq!(b.a, EpsPoly::from_coeffs([3, -94906250]));
        assert_eq!(b.m, MagnitudeExpr::abs_of(left));
        assert_eq!(b.m.to_string(), "|(_1 - _5)*(_4 - _6)|");
        assert!(!b.ufp);
        let u = derive(left, true, &b64()).unwrap();
        assert_eq!(u.m.to_string(), "|(_1 - _5)*(_4 - _6)| + u_N");
    }

    #[test]
    fn leaf_and_product_bounds() {
        for ufp in [false, true] {
            let b = derive(&parse_expr("_1").unwrap(), ufp, &b64()).unwrap();
            assert!(b.a.is_zero());
            assert_eq!(b.m.to_string(), "|_1|");
        }
        let b = derive(&parse_expr("_1 * _2").unwrap(), true, &b64()).unwrap();
        assert_eq!(b.a, EpsPoly::from_coeffs([1]));
        assert_eq!(b.m.to_string(), "|_1*_2| + u_N");
        let b = derive(&parse_expr("_1 * _2").unwrap(), false, &b64()).unwrap();
        assert_eq!(b.m.to_string(), "|_1*_2|");
    }

    #[test]
    fn constants_count_as_atoms() {
        let b = derive(&parse_expr("_1 - 2.5").unwrap(), false, &b64()).unwrap();
        assert_eq!(b.a, EpsPoly::epsilon());
        let b = derive(&parse_expr("(_1 - 2.5)*(_2 + 1)").unwrap(), false, &b64()).unwrap();
        assert_eq!(b.a, EpsPoly::from_coeffs([3, -94906250]));
        let b = derive(&parse_expr("2.5").unwrap(), false, &b64()).unwrap();
        assert_eq!(b.m.eval(&[]), 2.5);
    }

    #[test]
    fn general_rules_compose() {
        let b = derive(&parse_expr("_1*_2*_3").unwrap(), false, &b64()).unwrap();
        // (1+ε)(ε + 0 + 0) + ε
        assert_eq!(b.a, EpsPoly::from_coeffs([2, 1]));
        let b = derive(&parse_expr("_1 + _2 + _3").unwrap(), true, &b64()).unwrap();
        assert_eq!(b.a, EpsPoly::from_coeffs([2, 1]));
        assert_eq!(b.m.to_string(), "|_1 + _2| + |_3|");
    }

    #[test]
    fn derive_is_deterministic() {
        for p in Builtin::ALL {
            for ufp in [false, true] {
                assert_eq!(derive(&p.expr(), ufp, &b64()), derive(&p.expr(), ufp, &b64()));
            }
        }
    }

    /// Exact oracle: the constants are the least floats meeting the
    /// inequalities, so their predecessors must violate them.
    fn check_constants(a_max: &EpsPoly, c: FilterConstants) {
        let params = b64();
        let a = a_max.eval_at(&params);
        let eps = Dyadic::pow2(-53);
        let d = |x: f64| Dyadic::from_f64(x).unwrap();
        let (a3, a4) = (d(c.a3), d(c.a4));
        assert!(&a3 * &(Dyadic::one() - eps.clone()) > a);
        assert!(&d(c.a3.next_down()) * &(Dyadic::one() - eps.clone()) <= a);
        let one_plus = Dyadic::one() + eps;
        let t = &(&a3 * &one_plus) * &one_plus;
        assert!(a4 >= t);
        assert!(d(c.a4.next_down()) < t);
    }

    #[test]
    fn orient2d_constants() {
        let a = EpsPoly::from_coeffs([3, -94906250]);
        let c = compute_constants(&a, &b64()).unwrap();
        check_constants(&a, c);
        let eps = f64::EPSILON / 2.0;
        assert!(c.a4 > 2.9 * eps && c.a4 < 3.1 * eps);
        assert!(c.a4 < 8.88720573725927e-16);
    }

    #[test]
    fn small_constants() {
        let c = compute_constants(&EpsPoly::zero(), &b64()).unwrap();
        assert_eq!(c.a3, pow2(-1074));
        assert_eq!(c.a4, pow2(-1073));
        let a = EpsPoly::epsilon();
        let c = compute_constants(&a, &b64()).unwrap();
        check_constants(&a, c);
        let eps = pow2(-53);
        assert!(c.a4 > eps && c.a4 < 1.001 * eps * 1.1);
    }

    #[test]
    fn rounded_input_rule_reproduces_displayed_bound() {
        let e = Builtin::Orient2d.expr();
        let TopSplit::SumLike { left, right, op } = e.top_decomposition() else {
            panic!()
        };
        let s = derive_split(&RuleSet::rounded_input(), left, right, op, false, &b64()).unwrap();
        assert_eq!(s.a_max, EpsPoly::from_coeffs([5, 10, 10, 5, 1]));
        assert_eq!(
            s.magnitude().to_string(),
            "(|_1| + |_5|)*(|_4| + |_6|) + (|_3| + |_5|)*(|_2| + |_6|)"
        );
        let c = compute_constants(&s.a_max, &b64()).unwrap();
        assert_eq!(c.a4, 5.0 * pow2(-53) + 32.0 * pow2(-106));
    }

    #[test]
    fn rule_set_without_leaf_rule_fails() {
        let rules = RuleSet::new(vec![Arc::new(StandardRule::Sum)]);
        assert!(matches!(
            rules.derive(&parse_expr("_1 + _2").unwrap(), false, &b64()),
            Err(DeriveError::NoApplicableRule { .. })
        ));
    }

    fn orient_magnitude(ufp: bool) -> MagnitudeExpr {
        let e = Builtin::Orient2d.expr();
        let TopSplit::SumLike { left, right, op } = e.top_decomposition() else {
            panic!()
        };
        derive_split(&RuleSet::standard(), left, right, op, ufp, &b64())
            .unwrap()
            .magnitude()
    }

    #[test]
    fn staticize_unit_box() {
        let m = orient_magnitude(false);
        let s = staticize(&m, &[Interval::new(-1.0, 1.0); 6]).unwrap();
        // Magnitudes grow with |x_i|, so the maximum sits on a corner.
        let mut best = 0.0f64;
        for mask in 0..64u32 {
            let x: Vec<f64> = (0..6).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            best = best.max(m.eval(&x));
        }
        assert_eq!(best, 8.0);
        assert!(s >= best);
        assert!(s <= best * (1.0 + 8.0 * f64::EPSILON / 2.0));
    }

    #[test]
    fn staticize_degenerate_boxes() {
        let zero = [Interval::point(0.0); 6];
        assert_eq!(staticize(&orient_magnitude(false), &zero).unwrap(), 0.0);
        assert!(staticize(&orient_magnitude(true), &zero).unwrap() >= 2.0 * pow2(-1022));
        assert!(matches!(
            staticize(&orient_magnitude(false), &[Interval::new(f64::NAN, 1.0); 6]),
            Err(DeriveError::InvalidBounds { index: 0, .. })
        ));
        assert!(matches!(
            staticize(&orient_magnitude(false), &[Interval::new(0.0, 1.0); 3]),
            Err(DeriveError::BoundsArity { .. })
        ));
    }
}
