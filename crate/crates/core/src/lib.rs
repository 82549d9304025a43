//! Provably valid floating-point filters for polynomial sign predicates.
//!
//! Error bounds are derived from an expression once, at construction, and
//! turned into cheap runtime filters. Filters are chained into staged
//! predicates that end in an exact stage, so every call returns the exact
//! sign while almost all calls are decided by a handful of flops.
//!
//! ```
//! use fpfilter::predicates::{Builtin, Profile, StagedPredicate};
//! use fpfilter::fpn::Sign;
//!
//! let orient = StagedPredicate::default_pipeline(Builtin::Orient2d, Profile::Safe);
//! let s = orient.apply(&[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
//! assert_eq!(s, Sign::Positive);
//! ```

pub mod error_bounds;
pub mod expansion;
pub mod expr;
pub mod filters;
pub mod fpn;
pub mod harness;
pub mod interval;
pub mod predicates;

pub use expr::{parse_expr, Expr};
pub use filters::{FilterOutcome, Stage};
pub use fpn::{FpnParams, Sign};
pub use predicates::{Builtin, Profile, StagedPredicate};
