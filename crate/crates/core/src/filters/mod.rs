//! Filter stages and the contract they share.
//!
//! A stage either certifies the exact sign of the predicate polynomial or
//! gives up with [`FilterOutcome::Uncertain`]. Stages never panic on
//! non-finite inputs; they give up instead.

mod exact;
mod interval;
mod rect;
mod semi_static;
mod static_filter;
mod translation;
mod underflow;
mod zero;

pub use crate::expansion::ExpansionStage;
pub use exact::DyadicStage;
pub use interval::IntervalFilter;
pub use rect::IncircleRectFilter;
pub use semi_static::SemiStaticFilter;
pub use static_filter::{AlmostStaticFilter, StaticFilter};
pub use translation::TranslationFilter;
pub use underflow::underflow_in;
pub use zero::ZeroFilter;

use std::fmt;

use crate::fpn::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterOutcome {
    Certain(Sign),
    Uncertain,
}

impl FilterOutcome {
    pub fn sign(self) -> Option<Sign> {
        match self {
            FilterOutcome::Certain(s) => Some(s),
            FilterOutcome::Uncertain => None,
        }
    }

    pub fn is_certain(self) -> bool {
        matches!(self, FilterOutcome::Certain(_))
    }

    /// `Certain(sign(x))` for a finite `x`, `Uncertain` otherwise.
    pub(crate) fn of_finite(x: f64) -> FilterOutcome {
        if x.is_finite() {
            FilterOutcome::Certain(Sign::of_f64(x).unwrap())
        } else {
            FilterOutcome::Uncertain
        }
    }
}

impl fmt::Display for FilterOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterOutcome::Certain(s) => write!(f, "{s}"),
            FilterOutcome::Uncertain => f.write_str("uncertain"),
        }
    }
}

/// One stage of a staged predicate.
pub trait Stage: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn apply(&self, inputs: &[f64]) -> FilterOutcome;

    /// Informs stages with tracked bounds about upcoming inputs. Stateless
    /// stages ignore it.
    fn update(&mut self, _inputs: &[f64]) {}

    /// True if the stage never returns `Uncertain` on finite inputs.
    fn is_total(&self) -> bool {
        false
    }

    fn clone_box(&self) -> Box<dyn Stage>;
}

impl Clone for Box<dyn Stage> {
    fn clone(&self) -> Box<dyn Stage> {
        self.clone_box()
    }
}
