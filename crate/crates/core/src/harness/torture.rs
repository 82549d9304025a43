//! Known failure cases of the naive orientation predicate, run next to the
//! staged one and the exact oracle.

use std::fmt;

use crate::fpn::{oracle_sign, pow2, Sign};
use crate::predicates::{Builtin, Profile, StagedPredicate};

pub type Point = [f64; 2];

/// The near-collinear points `(-0.01, -0.59)`, `(0.01, 0.57)`, `(0, -0.01)`.
pub const A: Point = [-0.01, -0.59];
pub const B: Point = [0.01, 0.57];
pub const C: Point = [0.0, -0.01];
/// The two extra points of the collinearity contradiction.
pub const D: Point = [0.15, 8.69];
pub const E: Point = [0.07, 4.05];

fn args(a: Point, b: Point, c: Point) -> [f64; 6] {
    [a[0], a[1], b[0], b[1], c[0], c[1]]
}

/// The orientation realisation as written, one rounding per operation.
pub fn naive_orient(a: Point, b: Point, c: Point) -> f64 {
    Builtin::Orient2d.expr().eval_naive(&args(a, b, c))
}

/// The same realisation with the subtraction of products contracted into
/// a fused multiply-add, as an optimising compiler may emit it.
pub fn fma_orient(a: Point, b: Point, c: Point) -> f64 {
    (a[0] - c[0]).mul_add(b[1] - c[1], -((a[1] - c[1]) * (b[0] - c[0])))
}

pub fn exact_orient(a: Point, b: Point, c: Point) -> Sign {
    oracle_sign(&Builtin::Orient2d.expr(), &args(a, b, c)).expect("finite points")
}

fn value_str(x: f64) -> String {
    match Sign::of_f64(x) {
        Some(s) => s.to_string(),
        None => "NaN".to_string(),
    }
}

/// Where a point lies relative to a closed polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Inside,
    Boundary,
    Outside,
}

impl Relation {
    /// Closed polygons contain their boundary.
    pub fn in_closed(self) -> bool {
        self != Relation::Outside
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Inside => "inside",
            Relation::Boundary => "boundary",
            Relation::Outside => "outside",
        })
    }
}

/// Winding-number point-in-polygon test with the boundary reported
/// separately. `orient(u, v, p)` is the sign of `p` relative to `u → v`;
/// a NaN orientation counts as collinear.
pub fn winding_relation(
    orient: &dyn Fn(Point, Point, Point) -> Option<Sign>,
    polygon: &[Point],
    p: Point,
) -> Relation {
    let mut wn = 0i32;
    for i in 0..polygon.len() {
        let (u, v) = (polygon[i], polygon[(i + 1) % polygon.len()]);
        let side = orient(u, v, p).unwrap_or(Sign::Zero);
        if side == Sign::Zero
            && u[0].min(v[0]) <= p[0]
            && p[0] <= u[0].max(v[0])
            && u[1].min(v[1]) <= p[1]
            && p[1] <= u[1].max(v[1])
        {
            return Relation::Boundary;
        }
        if u[1] <= p[1] {
            if v[1] > p[1] && side == Sign::Positive {
                wn += 1;
            }
        } else if v[1] <= p[1] && side == Sign::Negative {
            wn -= 1;
        }
    }
    if wn != 0 {
        Relation::Inside
    } else {
        Relation::Outside
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TortureRow {
    pub case: String,
    pub naive: String,
    pub fma: String,
    pub staged: String,
    pub exact: String,
}

impl TortureRow {
    pub fn ok(&self) -> bool {
        self.staged == self.exact
    }
}

#[derive(Clone, Debug)]
pub struct TortureReport {
    pub profile: Profile,
    pub rows: Vec<TortureRow>,
    /// Whether the naive signs of the contradiction quadruple are
    /// contradictory, and likewise for the staged ones.
    pub naive_contradiction: bool,
    pub staged_contradiction: bool,
}

impl TortureReport {
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count() + usize::from(self.staged_contradiction)
    }

    pub fn row(&self, case: &str) -> Option<&TortureRow> {
        self.rows.iter().find(|r| r.case == case)
    }
}

impl fmt::Display for TortureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "profile: {}", self.profile.name())?;
        writeln!(
            f,
            "{:<28} {:>9} {:>9} {:>9} {:>9}  status",
            "case", "naive", "fma", "staged", "exact"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<28} {:>9} {:>9} {:>9} {:>9}  {}",
                r.case,
                r.naive,
                r.fma,
                r.staged,
                r.exact,
                if r.ok() { "ok" } else { "MISMATCH" }
            )?;
        }
        writeln!(
            f,
            "collinearity contradiction: naive {}, staged {}",
            if self.naive_contradiction { "yes" } else { "no" },
            if self.staged_contradiction { "yes" } else { "no" }
        )
    }
}

/// `(a,b,e)` and `(b,d,e)` collinear put all four points on the line
/// through `b` and `e`, so `(a,b,d)` must then be collinear as well.
fn contradiction(abe: Option<Sign>, bde: Option<Sign>, abd: Option<Sign>) -> bool {
    abe == Some(Sign::Zero) && bde == Some(Sign::Zero) && abd != Some(Sign::Zero)
}

pub fn run(profile: Profile) -> TortureReport {
    let staged = StagedPredicate::default_pipeline(Builtin::Orient2d, profile);
    let staged_orient =
        |a: Point, b: Point, c: Point| staged.apply(&args(a, b, c)).expect("finite points");
    let mut rows = Vec::new();
    let mut orient_row = |case: &str, a: Point, b: Point, c: Point| {
        rows.push(TortureRow {
            case: case.to_string(),
            naive: value_str(naive_orient(a, b, c)),
            fma: value_str(fma_orient(a, b, c)),
            staged: staged_orient(a, b, c).to_string(),
            exact: exact_orient(a, b, c).to_string(),
        });
    };

    let (s, t) = (pow2(-801), pow2(-800));
    orient_row("underflow", [s, s], [t, t], [s, t]);
    let big = pow2(800);
    orient_row("overflow", [big, big], [big, big], [0.0, 0.0]);
    orient_row("near-collinear (a,b,c)", A, B, C);
    orient_row("near-collinear (b,a,c)", B, A, C);
    orient_row("consistency (a,b,e)", A, B, E);
    orient_row("consistency (b,d,e)", B, D, E);
    orient_row("consistency (a,b,d)", A, B, D);

    let naive_sign = |a, b, c| Sign::of_f64(naive_orient(a, b, c));
    let naive_contradiction = contradiction(naive_sign(A, B, E), naive_sign(B, D, E), naive_sign(A, B, D));
    let staged_contradiction = contradiction(
        Some(staged_orient(A, B, E)),
        Some(staged_orient(B, D, E)),
        Some(staged_orient(A, B, D)),
    );

    let t1 = [[-1.0, 0.0], A, B];
    let t2 = [[1.0, 0.0], B, A];
    let union = [[-1.0, 0.0], A, [1.0, 0.0], B];
    let naive_fn = |a, b, c| Sign::of_f64(naive_orient(a, b, c));
    let fma_fn = |a, b, c| Sign::of_f64(fma_orient(a, b, c));
    let staged_fn = |a, b, c| Some(staged_orient(a, b, c));
    let exact_fn = |a, b, c| Some(exact_orient(a, b, c));
    for (case, poly) in [("winding c in t1", &t1[..]), ("winding c in t2", &t2[..]), ("winding c in t1+t2", &union[..])] {
        rows.push(TortureRow {
            case: case.to_string(),
            naive: winding_relation(&naive_fn, poly, C).to_string(),
            fma: winding_relation(&fma_fn, poly, C).to_string(),
            staged: winding_relation(&staged_fn, poly, C).to_string(),
            exact: winding_relation(&exact_fn, poly, C).to_string(),
        });
    }

    TortureReport {
        profile,
        rows,
        naive_contradiction,
        staged_contradiction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_behave_as_documented() {
        let r = run(Profile::Safe);
        assert_eq!(r.mismatches(), 0, "{r}");
        let u = r.row("underflow").unwrap();
        assert_eq!((u.naive.as_str(), u.staged.as_str()), ("0", "+1"));
        let o = r.row("overflow").unwrap();
        assert_eq!((o.naive.as_str(), o.staged.as_str()), ("NaN", "0"));
        assert!(r.naive_contradiction);
        assert!(!r.staged_contradiction);
        let rel: Vec<&str> = r.rows[r.rows.len() - 3..].iter().map(|r| r.exact.as_str()).collect();
        assert_eq!(rel, ["inside", "outside", "inside"]);
        // Without FMA the near-collinear point touches both triangles; with
        // it, it is outside both.
        let naive: Vec<&str> = r.rows[r.rows.len() - 3..].iter().map(|r| r.naive.as_str()).collect();
        assert_eq!(naive, ["boundary", "boundary", "inside"]);
        let fma: Vec<&str> = r.rows[r.rows.len() - 3..].iter().map(|r| r.fma.as_str()).collect();
        assert_eq!(fma, ["outside", "outside", "inside"]);
    }

    #[test]
    fn fast_profile_fails_only_on_underflow() {
        let r = run(Profile::Fast);
        let bad: Vec<&str> = r.rows.iter().filter(|r| !r.ok()).map(|r| r.case.as_str()).collect();
        assert_eq!(bad, ["underflow"]);
        assert_eq!(r.row("underflow").unwrap().staged, "0");
    }

    #[test]
    fn winding_on_a_square() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let f = |a, b, c| Some(exact_orient(a, b, c));
        assert_eq!(winding_relation(&f, &sq, [1.0, 1.0]), Relation::Inside);
        assert_eq!(winding_relation(&f, &sq, [2.0, 1.0]), Relation::Boundary);
        assert_eq!(winding_relation(&f, &sq, [3.0, 1.0]), Relation::Outside);
        let mut cw = sq;
        cw.reverse();
        assert_eq!(winding_relation(&f, &cw, [1.0, 1.0]), Relation::Inside);
        assert!(Relation::Boundary.in_closed());
    }
}
