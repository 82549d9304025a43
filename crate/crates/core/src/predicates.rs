//! Built-in predicate polynomials and staged predicates.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error_bounds::DeriveError;
use crate::expansion::ExpansionStage;
use crate::expr::{Expr, ParseError};
use crate::filters::{DyadicStage, FilterOutcome, IntervalFilter, SemiStaticFilter, Stage, ZeroFilter};
use crate::fpn::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Orient2d,
    Incircle2d,
    Orient3d,
    PowerSide3d,
}

fn x(i: usize) -> Expr {
    Expr::input(i)
}

/// `r1x·r2y - r2x·r1y`.
fn det2(r1: [&Expr; 2], r2: [&Expr; 2]) -> Expr {
    r1[0].clone() * r2[1].clone() - r2[0].clone() * r1[1].clone()
}

/// Cofactor expansion along the last column, terms combined left to right.
fn det3(r1: [&Expr; 3], r2: [&Expr; 3], r3: [&Expr; 3]) -> Expr {
    let m1 = det2([r2[0], r2[1]], [r3[0], r3[1]]);
    let m2 = det2([r1[0], r1[1]], [r3[0], r3[1]]);
    let m3 = det2([r1[0], r1[1]], [r2[0], r2[1]]);
    r1[2].clone() * m1 - r2[2].clone() * m2 + r3[2].clone() * m3
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [
        Builtin::Orient2d,
        Builtin::Incircle2d,
        Builtin::Orient3d,
        Builtin::PowerSide3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Orient2d => "orient2d",
            Builtin::Incircle2d => "incircle2d",
            Builtin::Orient3d => "orient3d",
            Builtin::PowerSide3d => "power_side_3d",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Orient2d => 6,
            Builtin::Incircle2d => 8,
            Builtin::Orient3d => 12,
            Builtin::PowerSide3d => 20,
        }
    }

    /// The realisation. Point coordinates are consecutive inputs: `(_1, _2)`
    /// is the first 2D point, `(_1, _2, _3, _4)` the first weighted 3D point.
    pub fn expr(self) -> Expr {
        match self {
            // Positive when c lies left of the line from a to b.
            Builtin::Orient2d => {
                let d = |p: usize, k: usize| x(2 * p + k + 1) - x(4 + k + 1);
                det2([&d(0, 0), &d(0, 1)], [&d(1, 0), &d(1, 1)])
            }
            // Positive when d lies inside the circle through a, b, c taken
            // counterclockwise.
            Builtin::Incircle2d => {
                let d = |p: usize, k: usize| x(2 * p + k + 1) - x(6 + k + 1);
                let lift = |p: usize| d(p, 0) * d(p, 0) + d(p, 1) * d(p, 1);
                let row = |p: usize| [d(p, 0), d(p, 1)];
                let [a, b, c] = [row(0), row(1), row(2)];
                let ma = det2([&b[0], &b[1]], [&c[0], &c[1]]);
                let mb = det2([&a[0], &a[1]], [&c[0], &c[1]]);
                let mc = det2([&a[0], &a[1]], [&b[0], &b[1]]);
                lift(0) * ma - lift(1) * mb + lift(2) * mc
            }
            Builtin::Orient3d => {
                let d = |p: usize, k: usize| x(3 * p + k + 1) - x(9 + k + 1);
                let row = |p: usize| [d(p, 0), d(p, 1), d(p, 2)];
                let [a, b, c] = [row(0), row(1), row(2)];
                det3(
                    [&a[0], &a[1], &a[2]],
                    [&b[0], &b[1], &b[2]],
                    [&c[0], &c[1], &c[2]],
                )
            }
            Builtin::PowerSide3d => {
                let d = |p: usize, k: usize| x(4 * p + k + 1) - x(16 + k + 1);
                let lift = |p: usize| {
                    d(p, 0) * d(p, 0) + d(p, 1) * d(p, 1) + d(p, 2) * d(p, 2)
                        + (x(16 + 4) - x(4 * p + 4))
                };
                let row = |p: usize| [d(p, 0), d(p, 1), d(p, 2)];
                let rows = [row(0), row(1), row(2), row(3)];
                let minor = |skip: usize| {
                    let r: Vec<&[Expr; 3]> = (0..4).filter(|&i| i != skip).map(|i| &rows[i]).collect();
                    det3(
                        [&r[0][0], &r[0][1], &r[0][2]],
                        [&r[1][0], &r[1][1], &r[1][2]],
                        [&r[2][0], &r[2][1], &r[2][2]],
                    )
                };
                lift(1) * minor(1) - lift(0) * minor(0) - lift(2) * minor(2)
                    + lift(3) * minor(3)
            }
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = PredicateError;

    fn from_str(s: &str) -> Result<Builtin, PredicateError> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| PredicateError::UnknownBuiltin(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Semi-static filter without underflow protection first.
    Fast,
    /// Semi-static filter with underflow protection first.
    Safe,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Fast => "fast",
            Profile::Safe => "safe",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = PredicateError;

    fn from_str(s: &str) -> Result<Profile, PredicateError> {
        match s {
            "fast" => Ok(Profile::Fast),
            "safe" => Ok(Profile::Safe),
            _ => Err(PredicateError::UnknownProfile(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum PredicateError {
    #[error("unknown predicate `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown profile `{0}` (expected fast or safe)")]
    UnknownProfile(String),
    #[error("input {index} is not finite")]
    NonFinite { index: usize },
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("the last stage must be total")]
    NotTotal,
    #[error("cannot insert at position {position}: the total stage at {last} must stay last")]
    Position { position: usize, last: usize },
    #[error("no stage decided")]
    Undecided,
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// An ordered cascade of stages ending in a total one. The first stage
/// that certifies a sign decides.
#[derive(Clone, Debug)]
pub struct StagedPredicate {
    arity: usize,
    stages: Vec<Box<dyn Stage>>,
}

impl StagedPredicate {
    pub fn new(arity: usize, stages: Vec<Box<dyn Stage>>) -> Result<StagedPredicate, PredicateError> {
        match stages.last() {
            Some(s) if s.is_total() => Ok(StagedPredicate { arity, stages }),
            _ => Err(PredicateError::NotTotal),
        }
    }

    /// The default cascade for any expression.
    pub fn for_expr(e: &Expr, profile: Profile) -> Result<StagedPredicate, PredicateError> {
        let arity = e.arity()?;
        let ufp = profile == Profile::Safe;
        StagedPredicate::new(
            arity,
            vec![
                Box::new(SemiStaticFilter::new(e, ufp)?),
                Box::new(ZeroFilter::new(e)),
                Box::new(IntervalFilter::new(e)),
                Box::new(ExpansionStage::new(e)),
                Box::new(DyadicStage::new(e)),
            ],
        )
    }

    pub fn default_pipeline(b: Builtin, profile: Profile) -> StagedPredicate {
        StagedPredicate::for_expr(&b.expr(), profile).expect("built-in predicates derive")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn stages(&self) -> &[Box<dyn Stage>] {
        &self.stages
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.name()).collect()
    }

    fn check(&self, inputs: &[f64]) -> Result<(), PredicateError> {
        if inputs.len() != self.arity {
            return Err(PredicateError::Arity {
                expected: self.arity,
                got: inputs.len(),
            });
        }
        match inputs.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(PredicateError::NonFinite { index }),
            None => Ok(()),
        }
    }

    /// The exact sign and the 0-based index of the stage that decided it.
    #[inline]
    pub fn apply_with_stage(&self, inputs: &[f64]) -> Result<(Sign, usize), PredicateError> {
        self.check(inputs)?;
        for (k, s) in self.stages.iter().enumerate() {
            if let FilterOutcome::Certain(sign) = s.apply(inputs) {
                return Ok((sign, k));
            }
        }
        Err(PredicateError::Undecided)
    }

    pub fn apply(&self, inputs: &[f64]) -> Result<Sign, PredicateError> {
        self.apply_with_stage(inputs).map(|(s, _)| s)
    }

    /// Forwards upcoming inputs to stages that track bounds.
    pub fn update(&mut self, inputs: &[f64]) {
        for s in &mut self.stages {
            s.update(inputs);
        }
    }

    /// A copy with `stage` inserted before the current stage at `position`.
    /// The total stage must remain last.
    pub fn register_custom_stage(
        &self,
        position: usize,
        stage: Box<dyn Stage>,
    ) -> Result<StagedPredicate, PredicateError> {
        let last = self.stages.len() - 1;
        if position > last {
            return Err(PredicateError::Position { position, last });
        }
        let mut stages = self.stages.clone();
        stages.insert(position, stage);
        Ok(StagedPredicate {
            arity: self.arity,
            stages,
        })
    }
}
