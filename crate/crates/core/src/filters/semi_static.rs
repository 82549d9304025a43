use super::underflow::{product_underflows, tape_underflows};
use super::{FilterOutcome, Stage};
use crate::error_bounds::{
    compute_constants, derive_split, DeriveError, FilterConstants, RuleSet, SplitBound,
};
use crate::expr::tape::Tape;
use crate::expr::{Expr, TopSplit};
use crate::fpn::{FpnParams, Sign};

const U_S: f64 = f64::from_bits(1);

#[derive(Clone, Debug)]
enum Kernel {
    /// `p̃ = p̃1 ∘ p̃2` with a nonzero error bound.
    Split {
        tape: Tape,
        p: u32,
        m: u32,
        a4: f64,
    },
    /// A realisation whose rounding cannot change its sign.
    Exact { tape: Tape, p: u32 },
    /// The sign of a product is the product of the factors' signs.
    Product(Box<Kernel>, Box<Kernel>),
}

impl Kernel {
    fn build(e: &Expr, ufp: bool, rules: &RuleSet, params: &FpnParams) -> Result<Kernel, DeriveError> {
        match e.top_decomposition() {
            TopSplit::SumLike { left, right, op } => {
                let split = derive_split(rules, left, right, op, ufp, params)?;
                let mut tape = Tape::new();
                let p = tape.expr(e);
                if split.a_max.is_zero() {
                    return Ok(Kernel::Exact { tape, p });
                }
                let m = split.magnitude().compile(&mut tape);
                let c = compute_constants(&split.a_max, params)?;
                Ok(Kernel::Split {
                    tape,
                    p,
                    m,
                    a4: c.a4,
                })
            }
            TopSplit::NotSumLike => match e {
                Expr::Product(l, r) => Ok(Kernel::Product(
                    Box::new(Kernel::build(l, ufp, rules, params)?),
                    Box::new(Kernel::build(r, ufp, rules, params)?),
                )),
                _ => {
                    let mut tape = Tape::new();
                    let p = tape.expr(e);
                    Ok(Kernel::Exact { tape, p })
                }
            },
        }
    }

    #[inline]
    fn apply(&self, inputs: &[f64], ufp: bool) -> FilterOutcome {
        match self {
            Kernel::Split { tape, p, m, a4 } => tape.with_run(inputs, |r| {
                let p = r[*p as usize];
                let e = if ufp {
                    a4 * r[*m as usize] + U_S
                } else {
                    a4 * r[*m as usize]
                };
                // With e = ∞ or NaN the comparison is false, as it must be.
                if p.abs() > e || (!ufp && e == 0.0) {
                    match Sign::of_f64(p) {
                        Some(s) => FilterOutcome::Certain(s),
                        None => FilterOutcome::Uncertain,
                    }
                } else {
                    FilterOutcome::Uncertain
                }
            }),
            Kernel::Exact { tape, p } => {
                tape.with_run(inputs, |r| FilterOutcome::of_finite(r[*p as usize]))
            }
            Kernel::Product(l, r) => match l.apply(inputs, ufp) {
                FilterOutcome::Certain(Sign::Zero) => FilterOutcome::Certain(Sign::Zero),
                FilterOutcome::Certain(a) => match r.apply(inputs, ufp) {
                    FilterOutcome::Certain(b) => FilterOutcome::Certain(a * b),
                    FilterOutcome::Uncertain => FilterOutcome::Uncertain,
                },
                FilterOutcome::Uncertain => match r.apply(inputs, ufp) {
                    FilterOutcome::Certain(Sign::Zero) => FilterOutcome::Certain(Sign::Zero),
                    _ => FilterOutcome::Uncertain,
                },
            },
        }
    }

    fn underflows(&self, inputs: &[f64]) -> bool {
        match self {
            Kernel::Split { tape, m, a4, .. } => {
                let mut regs = vec![0.0; tape.len()];
                tape.run(inputs, &mut regs);
                tape_underflows(tape, inputs) || product_underflows(*a4, regs[*m as usize])
            }
            Kernel::Exact { tape, .. } => tape_underflows(tape, inputs),
            Kernel::Product(l, r) => l.underflows(inputs) || r.underflows(inputs),
        }
    }
}

/// The semi-static filter: `p̃` is certified when `|p̃| > a4 ⊙ (m1 ⊕ m2)`
/// (plus `⊕ u_S` with underflow protection).
///
/// Roots that are products are filtered factor by factor; realisations
/// whose top-level parts are error-free are certified outright.
#[derive(Clone, Debug)]
pub struct SemiStaticFilter {
    expr: Expr,
    ufp: bool,
    kernel: Kernel,
    split: Option<(SplitBound, FilterConstants)>,
    name: String,
}

impl SemiStaticFilter {
    pub fn new(e: &Expr, ufp: bool) -> Result<SemiStaticFilter, DeriveError> {
        SemiStaticFilter::with_rules(e, ufp, &RuleSet::standard())
    }

    pub fn with_rules(e: &Expr, ufp: bool, rules: &RuleSet) -> Result<SemiStaticFilter, DeriveError> {
        let params = FpnParams::binary64();
        let kernel = Kernel::build(e, ufp, rules, &params)?;
        let split = match e.top_decomposition() {
            TopSplit::SumLike { left, right, op } => {
                let s = derive_split(rules, left, right, op, ufp, &params)?;
                let c = compute_constants(&s.a_max, &params)?;
                Some((s, c))
            }
            TopSplit::NotSumLike => None,
        };
        let name = if ufp { "semi-static-ufp" } else { "semi-static" };
        Ok(SemiStaticFilter {
            expr: e.clone(),
            ufp,
            kernel,
            split,
            name: name.to_string(),
        })
    }

    /// Renames the stage, e.g. to tell apart filters from custom rules.
    pub fn named(mut self, name: &str) -> SemiStaticFilter {
        self.name = name.to_string();
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn ufp(&self) -> bool {
        self.ufp
    }

    /// Bounds of the top-level parts, if the root is a sum or difference.
    pub fn split(&self) -> Option<&SplitBound> {
        self.split.as_ref().map(|(s, _)| s)
    }

    pub fn constants(&self) -> Option<FilterConstants> {
        self.split.as_ref().map(|(_, c)| *c)
    }

    /// Whether the filter's own evaluation underflows at these inputs. The
    /// filter without protection is only guaranteed valid when it does not.
    pub fn underflows(&self, inputs: &[f64]) -> bool {
        self.kernel.underflows(inputs)
    }
}

impl Stage for SemiStaticFilter {
    fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        self.kernel.apply(inputs, self.ufp)
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}
