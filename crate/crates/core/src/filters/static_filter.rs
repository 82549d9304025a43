use super::{FilterOutcome, Stage};
use crate::error_bounds::{
    compute_constants, derive_split, staticize, DeriveError, MagnitudeExpr, RuleSet,
};
use crate::expr::tape::Tape;
use crate::expr::{Expr, TopSplit};
use crate::fpn::{FpnParams, Sign};
use crate::interval::Interval;

const U_S: f64 = f64::from_bits(1);

/// The semi-static bound with its magnitude replaced by an upper bound over
/// a box of inputs: `e = a4 ⊙ sup(m1 ⊕ m2)`, computed once.
///
/// Inputs outside the box are never certified.
#[derive(Clone, Debug)]
pub struct StaticFilter {
    tape: Tape,
    p: u32,
    ufp: bool,
    a4: f64,
    magnitude: MagnitudeExpr,
    bounds: Vec<Interval>,
    e_static: f64,
}

impl StaticFilter {
    pub fn new(e: &Expr, bounds: &[Interval], ufp: bool) -> Result<StaticFilter, DeriveError> {
        let params = FpnParams::binary64();
        let TopSplit::SumLike { left, right, op } = e.top_decomposition() else {
            return Err(DeriveError::NotSumLike {
                expr: e.to_string(),
            });
        };
        let split = derive_split(&RuleSet::standard(), left, right, op, ufp, &params)?;
        let a4 = compute_constants(&split.a_max, &params)?.a4;
        let mut tape = Tape::new();
        let p = tape.expr(e);
        let mut f = StaticFilter {
            tape,
            p,
            ufp,
            a4,
            magnitude: split.magnitude(),
            bounds: Vec::new(),
            e_static: f64::INFINITY,
        };
        f.set_bounds(bounds)?;
        Ok(f)
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn e_static(&self) -> f64 {
        self.e_static
    }

    /// Replaces the box and recomputes the bound.
    pub fn set_bounds(&mut self, bounds: &[Interval]) -> Result<(), DeriveError> {
        let s = staticize(&self.magnitude, bounds)?;
        self.e_static = if self.ufp {
            self.a4 * s + U_S
        } else {
            self.a4 * s
        };
        self.bounds = bounds.to_vec();
        Ok(())
    }

    fn contains(&self, inputs: &[f64]) -> bool {
        inputs.len() >= self.bounds.len()
            && self.bounds.iter().zip(inputs).all(|(b, &x)| b.contains(x))
    }
}

impl Stage for StaticFilter {
    fn name(&self) -> &str {
        "static"
    }

    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        if !self.contains(inputs) {
            return FilterOutcome::Uncertain;
        }
        let e = self.e_static;
        self.tape.with_run(inputs, |r| {
            let p = r[self.p as usize];
            if p.abs() > e || (!self.ufp && e == 0.0) {
                Sign::of_f64(p).map_or(FilterOutcome::Uncertain, FilterOutcome::Certain)
            } else {
                FilterOutcome::Uncertain
            }
        })
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}

/// A static filter whose box grows to cover every input it is updated
/// with. `update` needs exclusive access; `apply` may run concurrently
/// between updates.
#[derive(Clone, Debug)]
pub struct AlmostStaticFilter {
    inner: StaticFilter,
}

impl AlmostStaticFilter {
    pub fn new(e: &Expr, initial: &[Interval], ufp: bool) -> Result<AlmostStaticFilter, DeriveError> {
        Ok(AlmostStaticFilter {
            inner: StaticFilter::new(e, initial, ufp)?,
        })
    }

    pub fn bounds(&self) -> &[Interval] {
        self.inner.bounds()
    }

    pub fn e_static(&self) -> f64 {
        self.inner.e_static()
    }

    /// Widens the box to contain `inputs`; non-finite values are skipped
    /// since no finite box can hold them.
    pub fn track(&mut self, inputs: &[f64]) {
        let mut grown = self.inner.bounds.clone();
        let mut changed = false;
        for (b, &x) in grown.iter_mut().zip(inputs) {
            if x.is_finite() && !b.contains(x) {
                *b = Interval::new(b.lo.min(x), b.hi.max(x));
                changed = true;
            }
        }
        if changed {
            self.inner
                .set_bounds(&grown)
                .expect("widened finite bounds stay valid");
        }
    }
}

impl Stage for AlmostStaticFilter {
    fn name(&self) -> &str {
        "almost-static"
    }

    fn apply(&self, inputs: &[f64]) -> FilterOutcome {
        self.inner.apply(inputs)
    }

    fn update(&mut self, inputs: &[f64]) {
        self.track(inputs);
    }

    fn clone_box(&self) -> Box<dyn Stage> {
        Box::new(self.clone())
    }
}
